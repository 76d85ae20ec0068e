//! Spherical microphone array: channel synthesis from SH coefficients,
//! band-limiting and normalization.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::ShTimeSeries;
use crate::sh::{sh_basis, unit_vector, ShMatrix};

/// em32 capsule directions: polar angle (radians, 4 decimals) and azimuth
/// (degrees), in the manufacturer's capsule order.
const EIGENMIKE_32: [(f64, f64); 32] = [
    (1.2043, 0.0),
    (1.5708, 32.0),
    (1.9373, 0.0),
    (1.5708, 328.0),
    (0.5585, 0.0),
    (0.9599, 45.0),
    (1.5708, 69.0),
    (2.1817, 45.0),
    (2.5831, 0.0),
    (2.1817, 315.0),
    (1.5708, 291.0),
    (0.9599, 315.0),
    (0.3665, 91.0),
    (1.0123, 90.0),
    (2.1118, 90.0),
    (2.7751, 89.0),
    (1.2043, 180.0),
    (1.5708, 212.0),
    (1.9373, 180.0),
    (1.5708, 148.0),
    (0.5585, 180.0),
    (0.9599, 225.0),
    (1.5708, 249.0),
    (2.1817, 225.0),
    (2.5831, 180.0),
    (2.1817, 135.0),
    (1.5708, 111.0),
    (0.9599, 135.0),
    (0.3665, 269.0),
    (1.0123, 270.0),
    (2.1293, 270.0),
    (2.7751, 271.0),
];

/// The 32 em32 directions `(θ, φ)` in radians.
pub fn eigenmike_directions() -> Vec<(f64, f64)> {
    EIGENMIKE_32
        .iter()
        .map(|&(t, p)| (t, p.to_radians()))
        .collect()
}

/// Array center (room frame), radius and capsule directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MicArraySpec {
    pub center: [f64; 3],
    pub radius: f64,
    pub mics: Vec<(f64, f64)>,
}

impl MicArraySpec {
    pub fn new(center: [f64; 3], radius: f64, mics: Vec<(f64, f64)>) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Config(format!("array radius must be positive, got {radius}")));
        }
        if mics.is_empty() {
            return Err(Error::Config("microphone grid is empty".into()));
        }
        if let Some(&(t, p)) = mics.iter().find(|&&(t, p)| !(0.0..=PI).contains(&t) || !p.is_finite()) {
            return Err(Error::Config(format!("invalid microphone direction ({t}, {p})")));
        }
        Ok(Self { center, radius, mics })
    }

    pub fn eigenmike(center: [f64; 3], radius: f64) -> Result<Self> {
        Self::new(center, radius, eigenmike_directions())
    }

    /// Capsule positions in the room frame.
    pub fn positions(&self) -> Vec<[f64; 3]> {
        self.mics
            .iter()
            .map(|&(t, p)| {
                let u = unit_vector(t, p);
                [
                    self.center[0] + self.radius * u[0],
                    self.center[1] + self.radius * u[1],
                    self.center[2] + self.radius * u[2],
                ]
            })
            .collect()
    }

    /// The array mirrored across `x = lx / 2`; capsule order is kept, so
    /// capsule `q` of the result is the mirror image of capsule `q`.
    pub fn mirrored_x(&self, lx: f64) -> Self {
        Self {
            center: [lx - self.center[0], self.center[1], self.center[2]],
            radius: self.radius,
            mics: self
                .mics
                .iter()
                .map(|&(t, p)| (t, (PI - p).rem_euclid(2.0 * PI)))
                .collect(),
        }
    }
}

/// Reads a direction grid: one `theta_rad,phi_rad` row per capsule, with an
/// optional header row.
pub fn load_mic_grid(path: &Path) -> Result<Vec<(f64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        if rec.len() != 2 {
            return Err(Error::format(path, format!("row {}: expected 2 columns", i + 1)));
        }
        match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
            (Ok(t), Ok(p)) => out.push((t, p)),
            _ if i == 0 => continue, // header
            _ => return Err(Error::format(path, format!("row {}: not a number", i + 1))),
        }
    }
    Ok(out)
}

pub(crate) fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::format(path, format!("{other:?}")),
    }
}

/// Linear-phase Kaiser-windowed-sinc low-pass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LowpassSettings {
    /// Cutoff in Hz; `None` means `0.9 · fs / 2`.
    pub cutoff_hz: Option<f64>,
    /// Odd tap count.
    pub taps: usize,
    /// Stop-band attenuation setting the Kaiser shape.
    pub attenuation_db: f64,
}

impl Default for LowpassSettings {
    fn default() -> Self {
        Self {
            cutoff_hz: None,
            taps: 63,
            attenuation_db: 60.0,
        }
    }
}

impl LowpassSettings {
    pub fn cutoff(&self, fs: f64) -> f64 {
        self.cutoff_hz.unwrap_or(0.45 * fs)
    }

    pub fn validate(&self, fs: f64) -> Result<()> {
        let fc = self.cutoff(fs);
        if !(fc > 0.0 && fc < fs / 2.0) {
            return Err(Error::Config(format!(
                "low-pass cutoff {fc} Hz must lie in (0, {}) Hz",
                fs / 2.0
            )));
        }
        if self.taps % 2 == 0 || self.taps < 3 {
            return Err(Error::Config(format!("low-pass tap count must be odd and >= 3, got {}", self.taps)));
        }
        if !(self.attenuation_db > 0.0) {
            return Err(Error::Config("low-pass attenuation must be positive".into()));
        }
        Ok(())
    }

    /// Normalized taps (DC gain 1).
    pub fn design(&self, fs: f64) -> Result<Vec<f64>> {
        self.validate(fs)?;
        let a = self.attenuation_db;
        let beta = if a > 50.0 {
            0.1102 * (a - 8.7)
        } else if a >= 21.0 {
            0.5842 * (a - 21.0).powf(0.4) + 0.07886 * (a - 21.0)
        } else {
            0.0
        };
        let wc = self.cutoff(fs) / fs;
        let mid = (self.taps / 2) as f64;
        let i0b = bessel_i0(beta);
        let mut h: Vec<f64> = (0..self.taps)
            .map(|k| {
                let x = k as f64 - mid;
                let sinc = if x == 0.0 {
                    2.0 * wc
                } else {
                    (2.0 * PI * wc * x).sin() / (PI * x)
                };
                let r = x / mid;
                sinc * bessel_i0(beta * (1.0 - r * r).max(0.0).sqrt()) / i0b
            })
            .collect();
        let sum: f64 = h.iter().sum();
        h.iter_mut().for_each(|v| *v /= sum);
        Ok(h)
    }
}

fn bessel_i0(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let (mut term, mut sum) = (1.0, 1.0);
    for k in 1..200 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

/// Zero-phase application of an odd-length symmetric FIR; same length out.
fn filter_centered<T>(x: &[T], h: &[f64]) -> Vec<T>
where
    T: Copy + Default + std::ops::AddAssign + std::ops::Mul<f64, Output = T>,
{
    let d = (h.len() / 2) as isize;
    let n = x.len() as isize;
    (0..n)
        .map(|i| {
            let mut acc = T::default();
            for (k, hk) in h.iter().enumerate() {
                let j = i + d - k as isize;
                if (0..n).contains(&j) {
                    acc += x[j as usize] * *hk;
                }
            }
            acc
        })
        .collect()
}

/// Band-limiting applicable to mic signals or SH coefficient series.
pub trait Lowpass: Sized {
    fn lowpass(&self, settings: &LowpassSettings) -> Result<Self>;
}

impl Lowpass for MicSignals {
    fn lowpass(&self, settings: &LowpassSettings) -> Result<Self> {
        let h = settings.design(self.fs)?;
        let mut out = self.clone();
        out.channels = self.channels.iter().map(|c| filter_centered(c, &h)).collect();
        out.lowpass = Some(*settings);
        Ok(out)
    }
}

impl Lowpass for ShTimeSeries {
    fn lowpass(&self, settings: &LowpassSettings) -> Result<Self> {
        let h = settings.design(self.fs())?;
        let k = crate::sh::coeff_count(self.order());
        let mut out = self.clone();
        for i in 0..k {
            let ch: Vec<Complex64> = self.frames().iter().map(|f| f.as_slice()[i]).collect();
            for (f, v) in out.frames_mut().iter_mut().zip(filter_centered(&ch, &h)) {
                f.as_mut_slice()[i] = v;
            }
        }
        Ok(out)
    }
}

pub fn lowpass<T: Lowpass>(x: &T, settings: &LowpassSettings) -> Result<T> {
    x.lowpass(settings)
}

/// Real microphone signals; channel `q` sample `i` is at sample index
/// `start + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct MicSignals {
    pub fs: f64,
    pub start: i64,
    pub directions: Vec<(f64, f64)>,
    pub channels: Vec<Vec<f64>>,
    /// Common gain applied by [`normalize_peak`].
    pub normalization: Option<f64>,
    pub lowpass: Option<LowpassSettings>,
}

impl MicSignals {
    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    pub fn len(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn max_abs(&self) -> f64 {
        self.channels
            .iter()
            .flatten()
            .fold(0.0, |a, v| a.max(v.abs()))
    }
}

/// `Σ ζₙᵐ(t) Yₙᵐ(θ_q, φ_q)` per capsule; the imaginary part must vanish.
pub fn synthesize_mic_signals(zeta: &ShTimeSeries, mics: &MicArraySpec) -> Result<MicSignals> {
    let basis: Vec<Vec<Complex64>> = mics
        .mics
        .iter()
        .map(|&(t, p)| sh_basis(zeta.order(), t, p))
        .collect();
    let mut channels = Vec::with_capacity(basis.len());
    for y in &basis {
        let raw: Vec<Complex64> = zeta
            .frames()
            .iter()
            .map(|f: &ShMatrix| f.as_slice().iter().zip(y).map(|(c, y)| c * y).sum())
            .collect();
        let norm = raw.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let residue = raw.iter().map(|v| v.im * v.im).sum::<f64>().sqrt();
        if residue > 1e-9 * norm {
            return Err(Error::Model(format!(
                "synthesized signal has imaginary residue {residue:.3e} (norm {norm:.3e}); coefficients are not conjugate-symmetric"
            )));
        }
        channels.push(raw.into_iter().map(|v| v.re).collect());
    }
    Ok(MicSignals {
        fs: zeta.fs(),
        start: zeta.start(),
        directions: mics.mics.clone(),
        channels,
        normalization: None,
        lowpass: None,
    })
}

/// Scales all channels by one factor so the largest magnitude is 1.
pub fn normalize_peak(signals: &MicSignals) -> Result<MicSignals> {
    let peak = signals.max_abs();
    if peak == 0.0 {
        return Err(Error::Model("cannot normalize an all-zero signal".into()));
    }
    let g = 1.0 / peak;
    let mut out = signals.clone();
    out.channels.iter_mut().flatten().for_each(|v| *v *= g);
    out.normalization = Some(signals.normalization.unwrap_or(1.0) * g);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sh::{ShIndex, ShMatrix};
    use approx::assert_relative_eq;

    #[test]
    fn eigenmike_table() {
        let d = eigenmike_directions();
        assert_eq!(d.len(), 32);
        assert_eq!(d[16].0, 1.2043);
        assert!((d[16].1 - PI).abs() < 1e-12);
        assert_eq!(d[13].0, 1.0123);
        assert!((d[13].1 - PI / 2.0).abs() < 1e-12);
        // distinct capsules, roughly uniform: nearest neighbours > 20°
        let u: Vec<_> = d.iter().map(|&(t, p)| unit_vector(t, p)).collect();
        for i in 0..32 {
            for j in 0..i {
                let dot: f64 = (0..3).map(|k| u[i][k] * u[j][k]).sum();
                assert!(dot < 20f64.to_radians().cos());
            }
        }
    }

    #[test]
    fn omni_field_is_identical_everywhere() {
        let mut f = ShMatrix::zeros(3);
        f[ShIndex { n: 0, m: 0 }] = Complex64::new((4.0 * PI).sqrt(), 0.0);
        let s: Vec<ShMatrix> = [0.5, -1.0, 2.0].iter().map(|&a| &f * Complex64::new(a, 0.0)).collect();
        let z = ShTimeSeries::new(1000.0, 0, 3, s).unwrap();
        let mics = MicArraySpec::eigenmike([0.0; 3], 0.05).unwrap();
        let out = synthesize_mic_signals(&z, &mics).unwrap();
        assert_eq!(out.channel_count(), 32);
        for ch in &out.channels {
            for (a, b) in ch.iter().zip([0.5, -1.0, 2.0]) {
                assert_relative_eq!(*a, b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn axisymmetric_field_depends_on_theta_only() {
        let mut f = ShMatrix::zeros(5);
        for n in 0..=5 {
            f[ShIndex { n, m: 0 }] = Complex64::new(1.0 / (n + 1) as f64, 0.0);
        }
        let z = ShTimeSeries::impulse(1000.0, f);
        let mics = MicArraySpec::eigenmike([0.0; 3], 0.05).unwrap();
        let out = synthesize_mic_signals(&z, &mics).unwrap();
        for i in 0..32 {
            for j in 0..32 {
                if mics.mics[i].0 == mics.mics[j].0 {
                    assert!((out.channels[i][0] - out.channels[j][0]).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn imaginary_residue_rejected() {
        let mut f = ShMatrix::zeros(1);
        f[ShIndex { n: 1, m: 1 }] = Complex64::new(1.0, 0.0);
        let z = ShTimeSeries::impulse(1000.0, f);
        let mics = MicArraySpec::eigenmike([0.0; 3], 0.05).unwrap();
        assert!(matches!(synthesize_mic_signals(&z, &mics), Err(Error::Model(_))));
    }

    fn impulse_signals(at: usize, len: usize) -> MicSignals {
        let mut ch = vec![0.0; len];
        ch[at] = 1.0;
        MicSignals {
            fs: 44_100.0,
            start: 0,
            directions: vec![(0.0, 0.0)],
            channels: vec![ch],
            normalization: None,
            lowpass: None,
        }
    }

    #[test]
    fn lowpass_properties() {
        let lp = LowpassSettings::default();
        let h = lp.design(44_100.0).unwrap();
        assert_eq!(h.len(), 63);
        assert!((h.iter().sum::<f64>() - 1.0).abs() < 1e-6);
        for k in 0..h.len() {
            assert!((h[k] - h[h.len() - 1 - k]).abs() < 1e-15);
        }
        let x = impulse_signals(100, 300);
        let y = lowpass(&x, &lp).unwrap();
        let peak = y.channels[0]
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .unwrap()
            .0;
        assert_eq!(peak, 100);
        assert!(y.channels[0][99].abs() > 0.0, "ringing around the impulse");
        assert!(LowpassSettings { cutoff_hz: Some(30_000.0), ..lp }.design(44_100.0).is_err());
        assert!(LowpassSettings { taps: 64, ..lp }.design(44_100.0).is_err());
    }

    #[test]
    fn normalization() {
        let mut x = impulse_signals(3, 10);
        x.channels[0][3] = 0.5;
        x.channels.push(vec![0.25; 10]);
        let y = normalize_peak(&x).unwrap();
        assert_eq!(y.max_abs(), 1.0);
        assert_eq!(y.normalization, Some(2.0));
        assert_eq!(y.channels[1][0] / y.channels[0][3], 0.5);
        let z = normalize_peak(&y).unwrap();
        assert_eq!(z.channels, y.channels);
        let mut silent = impulse_signals(0, 4);
        silent.channels[0][0] = 0.0;
        assert!(normalize_peak(&silent).is_err());
    }

    #[test]
    fn mirrored_array_positions() {
        let a = MicArraySpec::eigenmike([2.5, 3.5, 2.1], 0.042).unwrap();
        let b = a.mirrored_x(4.0);
        for (pa, pb) in a.positions().iter().zip(b.positions()) {
            assert_relative_eq!(pa[0], 4.0 - pb[0], epsilon = 1e-12);
            assert_relative_eq!(pa[1], pb[1], epsilon = 1e-12);
            assert_relative_eq!(pa[2], pb[2], epsilon = 1e-12);
        }
    }
}
