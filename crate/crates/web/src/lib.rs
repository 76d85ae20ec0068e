//! wasm-bindgen bindings for the static demo page in `www/`.
//!
//! Each export has a plain Rust twin so the numbers can be tested natively.

use tdw_smir::config::RunConfig;
use tdw_smir::directivity::AnalyticPattern;
use tdw_smir::kernel::{kernel_sequence, KernelSampling, WavefrontGeometry};
use tdw_smir::pipeline;
use tdw_smir::Result;
use wasm_bindgen::prelude::*;

/// A sampled signal starting at sample index `start`.
#[wasm_bindgen]
pub struct Trace {
    start: i32,
    fs: f64,
    values: Vec<f64>,
}

#[wasm_bindgen]
impl Trace {
    #[wasm_bindgen(getter)]
    pub fn start(&self) -> i32 {
        self.start
    }

    #[wasm_bindgen(getter)]
    pub fn fs(&self) -> f64 {
        self.fs
    }

    #[wasm_bindgen(getter)]
    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }
}

fn js(e: tdw_smir::Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

pub fn pattern_values(kind: &str, order: usize, points: usize) -> Result<Vec<f64>> {
    let kind: AnalyticPattern = kind.parse()?;
    Ok(pipeline::pattern_sweep(kind, order, points).into_iter().map(|(_, v)| v).collect())
}

/// Pattern gain over `points` polar angles from 0 to π.
#[wasm_bindgen]
pub fn pattern_curve(kind: &str, order: usize, points: usize) -> std::result::Result<Vec<f64>, JsValue> {
    pattern_values(kind, order, points).map_err(js)
}

pub fn kernel_values(radius: f64, distance: f64, n: usize, v: usize, fs: f64) -> Result<Trace> {
    let g = WavefrontGeometry::new(radius, distance, 343.0)?;
    let k = kernel_sequence(&g, n, 0, v, 0, fs, KernelSampling::CellAverage)?;
    Ok(Trace {
        start: k.start as i32,
        fs,
        values: k.values,
    })
}

/// Zonal (m = u = 0) wavefront kernel between source degree `v` and
/// observed degree `n`.
#[wasm_bindgen]
pub fn kernel_trace(radius: f64, distance: f64, n: usize, v: usize, fs: f64) -> std::result::Result<Trace, JsValue> {
    kernel_values(radius, distance, n, v, fs).map_err(js)
}

fn triple(x: &[f64], what: &str) -> Result<[f64; 3]> {
    x.try_into()
        .map_err(|_| tdw_smir::Error::Config(format!("{what}: expected 3 values, got {}", x.len())))
}

#[allow(clippy::too_many_arguments)]
pub fn mic_ir(
    dims: &[f64],
    beta: f64,
    source: &[f64],
    center: &[f64],
    pattern: &str,
    images: usize,
    order: usize,
    mic: usize,
) -> Result<Trace> {
    let mut cfg = RunConfig::example();
    cfg.room.dims = triple(dims, "dims")?;
    cfg.room.beta = [beta; 6];
    cfg.source.position = triple(source, "source")?;
    cfg.source.pattern = Some(pattern.parse()?);
    cfg.source.order = order;
    cfg.array.center = triple(center, "center")?;
    cfg.sim.order = order;
    cfg.sim.image_count = Some(images);
    let res = cfg.resolve()?;
    let (_, signals) = pipeline::simulate(&res)?;
    let values = signals
        .channels
        .get(mic)
        .cloned()
        .ok_or_else(|| tdw_smir::Error::Config(format!("mic {mic} out of range (0..{})", signals.channel_count())))?;
    Ok(Trace {
        start: signals.start as i32,
        fs: signals.fs,
        values,
    })
}

/// Impulse response at one capsule of the 32-capsule array, uniform wall
/// reflection coefficient `beta`.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn simulate_mic(
    dims: &[f64],
    beta: f64,
    source: &[f64],
    center: &[f64],
    pattern: &str,
    images: usize,
    order: usize,
    mic: usize,
) -> std::result::Result<Trace, JsValue> {
    mic_ir(dims, beta, source, center, pattern, images, order, mic).map_err(js)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cardioid_curve() {
        let v = pattern_values("cardioid", 5, 3).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-12 && (v[1] - 0.5).abs() < 1e-12 && v[2].abs() < 1e-12);
        assert!(pattern_values("banana", 5, 3).is_err());
    }

    #[test]
    fn kernel_sits_inside_support() {
        let fs = 48_000.0;
        let t = kernel_values(0.042, 1.5, 0, 0, fs).unwrap();
        let first = ((1.5 - 0.042) / 343.0 * fs).floor() as i32;
        let last = ((1.5 + 0.042) / 343.0 * fs).ceil() as i32;
        assert!(t.start >= first && t.start + t.values.len() as i32 <= last + 1);
        assert!(t.values.iter().any(|v| *v != 0.0));
        assert!(kernel_values(0.042, 0.03, 0, 0, fs).is_err());
    }

    #[test]
    fn direct_path_arrival() {
        let t = mic_ir(&[4.0, 6.0, 3.0], 0.7, &[1.0, 3.5, 2.1], &[2.5, 3.5, 2.1], "omni", 1, 2, 0).unwrap();
        let peak = t
            .values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .unwrap()
            .0 as i32
            + t.start;
        let expect = (1.5 / 343.0 * t.fs).round() as i32;
        assert!((peak - expect).abs() <= 8, "peak {peak}, expected near {expect}");
        assert!(mic_ir(&[4.0, 6.0], 0.7, &[1.0, 3.5, 2.1], &[2.5, 3.5, 2.1], "omni", 1, 2, 0).is_err());
        assert!(mic_ir(&[4.0, 6.0, 3.0], 0.7, &[1.0, 3.5, 2.1], &[2.5, 3.5, 2.1], "omni", 1, 2, 32).is_err());
    }
}
