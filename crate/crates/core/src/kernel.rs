//! Anechoic propagation of a train of directional spherical wavefronts from a
//! source on the `+z` axis to the SH coefficients observed on a sphere.
//!
//! A wavefront emitted at `τ` crosses the observation sphere of radius `r`
//! while `r_s - r <= c (t - τ) <= r_s + r`; the crossing is a circle of
//! constant polar angle. The observed coefficients are
//!
//! ```text
//! ζ_n^m(t) = c / (2 r r_s) ∫ Σ_v γ_v^m(τ) 𝒫_v^m[cos θ₀ˢ(t-τ)] 𝒫_n^m[cos θ₀(t-τ)] Ξ(t-τ) dτ
//! ```
//!
//! which is a bank of convolutions, one per `(n, v, m)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::series::ShTimeSeries;
use crate::sh::NormLegendreTable;

/// Observation radius, source distance and speed of sound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavefrontGeometry {
    radius: f64,
    distance: f64,
    speed_of_sound: f64,
}

impl WavefrontGeometry {
    pub fn new(radius: f64, distance: f64, speed_of_sound: f64) -> Result<Self> {
        if !(radius > 0.0) || !(speed_of_sound > 0.0) {
            return Err(Error::Config(format!(
                "radius and speed of sound must be positive (r = {radius}, c = {speed_of_sound})"
            )));
        }
        if !(distance > radius) {
            return Err(Error::NearField {
                distance,
                radius,
            });
        }
        Ok(Self {
            radius,
            distance,
            speed_of_sound,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn distance(&self) -> f64 {
        self.distance
    }

    pub fn speed_of_sound(&self) -> f64 {
        self.speed_of_sound
    }

    /// Lag interval `[(r_s - r)/c, (r_s + r)/c]` during which a wavefront
    /// intersects the sphere.
    pub fn support(&self) -> (f64, f64) {
        let c = self.speed_of_sound;
        ((self.distance - self.radius) / c, (self.distance + self.radius) / c)
    }
}

/// Indicator of the closed support interval. Lags that reproduce an edge
/// up to a few ulps of rounding count as on the edge.
pub fn window_xi(g: &WavefrontGeometry, dt: f64) -> bool {
    let travelled = g.speed_of_sound * dt;
    let slack = 4.0 * f64::EPSILON * (g.distance + g.radius);
    g.distance - g.radius - slack <= travelled && travelled <= g.distance + g.radius + slack
}

fn assert_in_window(g: &WavefrontGeometry, dt: f64) {
    assert!(
        window_xi(g, dt),
        "lag {dt} s lies outside the wavefront support {:?}",
        g.support()
    );
}

/// Polar angle (array frame) of the wavefront/sphere intersection circle.
pub fn cos_theta0(g: &WavefrontGeometry, dt: f64) -> f64 {
    assert_in_window(g, dt);
    let (r, rs, c) = (g.radius, g.distance, g.speed_of_sound);
    let v = (r * r + rs * rs - c * c * dt * dt) / (2.0 * r * rs);
    v.clamp(-1.0, 1.0)
}

/// Emission angle, seen from the source, of the rays that reach the circle.
pub fn cos_theta0_src(g: &WavefrontGeometry, dt: f64) -> f64 {
    assert_in_window(g, dt);
    let (r, rs, c) = (g.radius, g.distance, g.speed_of_sound);
    let v = -(c * c * dt * dt + rs * rs - r * r) / (2.0 * c * dt * rs);
    v.clamp(-1.0, 1.0)
}

/// How the continuous kernel is turned into a discrete sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelSampling {
    /// Kernel value at `dt = k / fs` (impulse-train sampling).
    Point,
    /// Kernel mean over the cell `[(k - ½)/fs, (k + ½)/fs]`, which keeps the
    /// area of each arrival exact.
    #[default]
    CellAverage,
}

/// Sampled kernel for one `(n, m, v, u)`; sample `i` sits at lag `start + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSequence {
    pub start: i64,
    pub values: Vec<f64>,
}

impl KernelSequence {
    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// All kernel sequences for one geometry: every `(n, v, m)` with `m >= 0`,
/// `m <= min(n, v)`. Negative orders share the `|m|` sequence.
#[derive(Debug, Clone)]
pub struct KernelBank {
    out_order: usize,
    src_order: usize,
    start: i64,
    // triples[t] = (n, v, m)
    triples: Vec<(usize, usize, usize)>,
    lookup: Vec<Option<usize>>,
    // frames[k][t]
    frames: Vec<Vec<f64>>,
}

impl KernelBank {
    pub fn new(
        g: &WavefrontGeometry,
        out_order: usize,
        src_order: usize,
        fs: f64,
        sampling: KernelSampling,
    ) -> Self {
        let mut triples = Vec::new();
        let mut lookup = vec![None; (out_order + 1) * (src_order + 1) * (out_order.min(src_order) + 1)];
        let mdim = out_order.min(src_order) + 1;
        for n in 0..=out_order {
            for v in 0..=src_order {
                for m in 0..=n.min(v) {
                    lookup[(n * (src_order + 1) + v) * mdim + m] = Some(triples.len());
                    triples.push((n, v, m));
                }
            }
        }

        let gain = g.speed_of_sound / (2.0 * g.radius * g.distance);
        let eval = |dt: f64, acc: &mut [f64], weight: f64| {
            let p_out = NormLegendreTable::new(out_order, cos_theta0(g, dt));
            let p_src = NormLegendreTable::new(src_order, cos_theta0_src(g, dt));
            for (slot, &(n, v, m)) in acc.iter_mut().zip(&triples) {
                *slot += weight * gain * p_src.get(v, m as i64) * p_out.get(n, m as i64);
            }
        };

        let (lo, hi) = g.support();
        let mut frames = Vec::new();
        let start;
        match sampling {
            KernelSampling::Point => {
                let first = (lo * fs).ceil() as i64 - 1;
                let last = (hi * fs).floor() as i64 + 1;
                let ks: Vec<i64> = (first..=last).filter(|&k| window_xi(g, k as f64 / fs)).collect();
                start = ks.first().copied().unwrap_or(first);
                for k in ks {
                    let mut acc = vec![0.0; triples.len()];
                    eval(k as f64 / fs, &mut acc, 1.0);
                    frames.push(acc);
                }
            }
            KernelSampling::CellAverage => {
                let rule = GaussLegendre::standard();
                let first = (lo * fs + 0.5).floor() as i64;
                let last = (hi * fs - 0.5).ceil() as i64;
                start = first;
                for k in first..=last {
                    let a = ((k as f64 - 0.5) / fs).max(lo);
                    let b = ((k as f64 + 0.5) / fs).min(hi);
                    let mut acc = vec![0.0; triples.len()];
                    if b > a {
                        // The Legendre factors behave like sqrt(distance to the
                        // window edge); substitute s = edge ± u² in edge cells.
                        let mut integrate = |a: f64, b: f64, left_edge: bool, right_edge: bool| {
                            if left_edge {
                                let w = (b - a).sqrt();
                                for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
                                    let u = 0.5 * w * (x + 1.0);
                                    eval(a + u * u, &mut acc, wt * 0.5 * w * 2.0 * u * fs);
                                }
                            } else if right_edge {
                                let w = (b - a).sqrt();
                                for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
                                    let u = 0.5 * w * (x + 1.0);
                                    eval(b - u * u, &mut acc, wt * 0.5 * w * 2.0 * u * fs);
                                }
                            } else {
                                let half = 0.5 * (b - a);
                                for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
                                    eval(a + half * (x + 1.0), &mut acc, wt * half * fs);
                                }
                            }
                        };
                        let at_lo = a == lo;
                        let at_hi = b == hi;
                        if at_lo && at_hi {
                            let mid = 0.5 * (a + b);
                            integrate(a, mid, true, false);
                            integrate(mid, b, false, true);
                        } else {
                            integrate(a, b, at_lo, at_hi);
                        }
                    }
                    frames.push(acc);
                }
            }
        }

        Self {
            out_order,
            src_order,
            start,
            triples,
            lookup,
            frames,
        }
    }

    /// Lag (in samples) of the first kernel sample.
    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    fn slot(&self, n: usize, v: usize, m: usize) -> Option<usize> {
        if n > self.out_order || v > self.src_order || m > n.min(v) {
            return None;
        }
        let mdim = self.out_order.min(self.src_order) + 1;
        self.lookup[(n * (self.src_order + 1) + v) * mdim + m]
    }

    /// Sequence coupling source coefficient `(v, u)` to observed `(n, m)`.
    pub fn sequence(&self, n: usize, m: i64, v: usize, u: i64) -> KernelSequence {
        let slot = if m == u {
            self.slot(n, v, m.unsigned_abs() as usize)
        } else {
            None
        };
        KernelSequence {
            start: self.start,
            values: match slot {
                Some(t) => self.frames.iter().map(|f| f[t]).collect(),
                None => vec![0.0; self.frames.len()],
            },
        }
    }
}

/// Sampled kernel for a single `(n, m, v, u)`; all-zero when `m != u`.
pub fn kernel_sequence(
    g: &WavefrontGeometry,
    n: usize,
    m: i64,
    v: usize,
    u: i64,
    fs: f64,
    sampling: KernelSampling,
) -> Result<KernelSequence> {
    if m.unsigned_abs() as usize > n || u.unsigned_abs() as usize > v {
        return Err(Error::Domain(format!("invalid SH indices ({n},{m}) / ({v},{u})")));
    }
    if !(fs > 0.0) {
        return Err(Error::Config(format!("sample rate must be positive, got {fs}")));
    }
    Ok(KernelBank::new(g, n, v, fs, sampling).sequence(n, m, v, u))
}

/// Convolves source coefficients with a prepared kernel bank.
pub fn propagate_with_bank(source: &ShTimeSeries, bank: &KernelBank) -> ShTimeSeries {
    let fs = source.fs();
    let out_order = bank.out_order;
    let src_order = source.order();
    assert!(src_order <= bank.src_order, "kernel bank prepared for a lower source order");
    let len = if source.is_empty() || bank.is_empty() {
        0
    } else {
        source.len() + bank.len() - 1
    };
    let mut out = ShTimeSeries::zeros(fs, source.start() + bank.start, out_order, len);
    let inv_fs = 1.0 / fs;
    let active: Vec<(usize, usize, usize, usize)> = bank
        .triples
        .iter()
        .enumerate()
        .filter(|(_, &(_, v, _))| v <= src_order)
        .map(|(t, &(n, v, m))| (t, n, v, m))
        .collect();

    let frames = out.frames_mut();
    for (j, src) in source.frames().iter().enumerate() {
        let g = src.as_slice();
        if g.iter().all(|c| c.re == 0.0 && c.im == 0.0) {
            continue;
        }
        for (kk, kernel) in bank.frames.iter().enumerate() {
            let dst = frames[j + kk].as_mut_slice();
            for &(t, n, v, m) in &active {
                let w = kernel[t] * inv_fs;
                let mi = m as i64;
                let (ni, vi) = ((n * n + n) as i64, (v * v + v) as i64);
                dst[(ni + mi) as usize] += g[(vi + mi) as usize] * w;
                if m > 0 {
                    dst[(ni - mi) as usize] += g[(vi - mi) as usize] * w;
                }
            }
        }
    }
    out
}

/// Observed coefficients (order `out_order`) for a source on the `+z` axis.
pub fn propagate_anechoic(
    source: &ShTimeSeries,
    g: &WavefrontGeometry,
    out_order: usize,
    sampling: KernelSampling,
) -> ShTimeSeries {
    let bank = KernelBank::new(g, out_order, source.order(), source.fs(), sampling);
    propagate_with_bank(source, &bank)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sh::{norm_legendre, ShMatrix};
    use approx::assert_relative_eq;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    const FS: f64 = 44_100.0;

    fn test_geometry() -> WavefrontGeometry {
        WavefrontGeometry::new(0.042, 1.5, 343.0).unwrap()
    }

    #[test]
    fn geometry_validation() {
        assert!(matches!(
            WavefrontGeometry::new(0.1, 0.1, 343.0),
            Err(Error::NearField { .. })
        ));
        assert!(WavefrontGeometry::new(0.0, 1.0, 343.0).is_err());
        assert!(WavefrontGeometry::new(0.1, 1.0, -1.0).is_err());
    }

    #[test]
    fn angles_at_window_edges() {
        let g = test_geometry();
        let (lo, hi) = g.support();
        assert_relative_eq!(cos_theta0(&g, lo), 1.0, epsilon = 1e-12);
        assert_relative_eq!(cos_theta0(&g, hi), -1.0, epsilon = 1e-12);
        let zero = (1.5f64 * 1.5 + 0.042 * 0.042).sqrt() / 343.0;
        assert!(cos_theta0(&g, zero).abs() < 1e-12);
        assert_relative_eq!(cos_theta0_src(&g, lo), -1.0, epsilon = 1e-12);
        assert_relative_eq!(cos_theta0_src(&g, hi), -1.0, epsilon = 1e-12);
    }

    #[test]
    #[should_panic(expected = "outside the wavefront support")]
    fn out_of_window_is_a_contract_violation() {
        cos_theta0(&test_geometry(), 0.0);
    }

    #[test]
    fn window_indicator() {
        let g = test_geometry();
        assert!(window_xi(&g, 1.5 / 343.0));
        assert!(!window_xi(&g, 0.0));
        let (lo, hi) = g.support();
        assert!(window_xi(&g, lo) && window_xi(&g, hi));
        // support length 2 r fs / c ≈ 10.8 samples
        assert_relative_eq!((hi - lo) * FS, 2.0 * 0.042 * FS / 343.0, epsilon = 1e-9);
        assert_relative_eq!((hi - lo) * FS, 10.8, epsilon = 0.05);
    }

    #[test]
    fn src_angle_stays_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let r = rng.gen_range(0.01..1.0);
            let g = WavefrontGeometry::new(r, r * rng.gen_range(1.001..50.0), rng.gen_range(300.0..1500.0))
                .unwrap();
            let (lo, hi) = g.support();
            let dt = lo + (hi - lo) * rng.gen_range(0.0..1.0);
            let v = cos_theta0_src(&g, dt);
            assert!((-1.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn kronecker_coupling() {
        let g = test_geometry();
        for sampling in [KernelSampling::Point, KernelSampling::CellAverage] {
            let k = kernel_sequence(&g, 2, 1, 3, 0, FS, sampling).unwrap();
            assert!(!k.values.is_empty());
            assert!(k.values.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn constant_zeroth_kernel() {
        let g = test_geometry();
        let expect = 343.0 / (2.0 * 0.042 * 1.5) / (4.0 * PI);
        let point = kernel_sequence(&g, 0, 0, 0, 0, FS, KernelSampling::Point).unwrap();
        assert!(point.values.len() >= 10);
        for v in &point.values {
            assert_relative_eq!(*v, expect, max_relative = 1e-12);
        }
        let cell = kernel_sequence(&g, 0, 0, 0, 0, FS, KernelSampling::CellAverage).unwrap();
        let n = cell.values.len();
        for v in &cell.values[1..n - 1] {
            assert_relative_eq!(*v, expect, max_relative = 1e-12);
        }
        // edges carry the covered fraction of their cell; total area is exact
        let (lo, hi) = g.support();
        assert_relative_eq!(cell.sum() / FS, expect * (hi - lo), max_relative = 1e-12);
    }

    #[test]
    fn first_degree_kernel_integrates_to_nearly_zero() {
        let g = test_geometry();
        for sampling in [KernelSampling::Point, KernelSampling::CellAverage] {
            let k = kernel_sequence(&g, 1, 0, 0, 0, FS, sampling).unwrap();
            let peak = k.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            assert!((k.sum() / FS).abs() <= 2.0 / FS * peak);
        }
    }

    #[test]
    fn cell_average_matches_brute_force_integral() {
        // independent oracle: fine midpoint rule of the closed-form kernel
        let g = WavefrontGeometry::new(0.05, 0.9, 343.0).unwrap();
        let (n, m, v) = (3usize, 1i64, 2usize);
        let seq = kernel_sequence(&g, n, m, v, m, FS, KernelSampling::CellAverage).unwrap();
        let (lo, hi) = g.support();
        let gain = 343.0 / (2.0 * 0.05 * 0.9);
        for (i, value) in seq.values.iter().enumerate() {
            let k = (seq.start + i as i64) as f64;
            let a = ((k - 0.5) / FS).max(lo);
            let b = ((k + 0.5) / FS).min(hi);
            let steps = 200_000;
            let h = (b - a) / steps as f64;
            let mut acc = 0.0;
            for s in 0..steps {
                let t = a + (s as f64 + 0.5) * h;
                let ct = (0.05f64 * 0.05 + 0.81 - 343.0 * 343.0 * t * t) / (2.0 * 0.05 * 0.9);
                let cs = -(343.0 * 343.0 * t * t + 0.81 - 0.0025) / (2.0 * 343.0 * t * 0.9);
                acc += gain
                    * norm_legendre(v, m, cs.clamp(-1.0, 1.0)).unwrap()
                    * norm_legendre(n, m, ct.clamp(-1.0, 1.0)).unwrap()
                    * h;
            }
            assert!((value - acc * FS).abs() < 1e-6 * gain, "sample {i}: {value} vs {}", acc * FS);
        }
    }

    fn random_series(rng: &mut ChaCha8Rng, order: usize, len: usize, start: i64) -> ShTimeSeries {
        let frames = (0..len)
            .map(|_| {
                let c = (0..(order + 1) * (order + 1))
                    .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect();
                ShMatrix::from_vec(order, c).unwrap()
            })
            .collect();
        ShTimeSeries::new(FS, start, order, frames).unwrap()
    }

    #[test]
    fn zero_in_zero_out_and_support() {
        let g = test_geometry();
        let src = ShTimeSeries::zeros(FS, 0, 2, 5);
        let out = propagate_anechoic(&src, &g, 4, KernelSampling::CellAverage);
        assert_eq!(out.max_abs(), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let src = random_series(&mut rng, 2, 3, 7);
        let out = propagate_anechoic(&src, &g, 4, KernelSampling::Point);
        let (lo, hi) = g.support();
        assert!(out.start() as f64 >= (7.0 + lo * FS).floor());
        assert!(((out.end() - 1) as f64) <= (9.0 + hi * FS).ceil());
    }

    #[test]
    fn azimuthal_coupling_and_axisymmetry() {
        let g = test_geometry();
        let mut coeffs = ShMatrix::zeros(3);
        for n in 0..=3 {
            coeffs[crate::sh::ShIndex { n, m: 0 }] = Complex64::new(n as f64 + 1.0, 0.0);
        }
        let out = propagate_anechoic(&ShTimeSeries::impulse(FS, coeffs), &g, 5, KernelSampling::CellAverage);
        for f in out.frames() {
            for idx in crate::sh::indices(5) {
                if idx.m != 0 {
                    assert_eq!(f[idx], Complex64::new(0.0, 0.0));
                }
            }
        }
        // a single (v, u) = (2, 1) input only reaches m = 1
        let mut coeffs = ShMatrix::zeros(2);
        coeffs[crate::sh::ShIndex { n: 2, m: 1 }] = Complex64::new(1.0, 0.5);
        let out = propagate_anechoic(&ShTimeSeries::impulse(FS, coeffs), &g, 5, KernelSampling::Point);
        for f in out.frames() {
            for idx in crate::sh::indices(5) {
                if idx.m != 1 {
                    assert_eq!(f[idx], Complex64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn linearity_and_shift() {
        let g = WavefrontGeometry::new(0.042, 2.3, 343.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_series(&mut rng, 3, 6, 0);
        let b = random_series(&mut rng, 3, 6, 0);
        let combo = a.map_frames(|f| f * Complex64::new(2.0, 0.0));
        let mut combo = combo;
        combo.accumulate(&b.map_frames(|f| f * Complex64::new(-0.5, 0.0)));
        let pa = propagate_anechoic(&a, &g, 5, KernelSampling::CellAverage);
        let pb = propagate_anechoic(&b, &g, 5, KernelSampling::CellAverage);
        let pc = propagate_anechoic(&combo, &g, 5, KernelSampling::CellAverage);
        let mut expect = pa.map_frames(|f| f * Complex64::new(2.0, 0.0));
        expect.accumulate(&pb.map_frames(|f| f * Complex64::new(-0.5, 0.0)));
        assert!(pc.max_abs_diff(&expect) < 1e-12 * pc.max_abs());

        let shifted = propagate_anechoic(&a.clone().shifted(13), &g, 5, KernelSampling::CellAverage);
        assert_eq!(shifted.start(), pa.start() + 13);
        assert_eq!(shifted.frames(), pa.frames());
    }
}
