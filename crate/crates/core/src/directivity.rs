//! Source directivity as SH coefficient sequences: analytic first-order
//! patterns and measured directional impulse responses.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::ShTimeSeries;
use crate::sh::{
    coeff_count, fibonacci_grid, sh_basis, EulerAngles, ShIndex, ShMatrix, ShRotation,
};

/// Frequency-invariant first-order pattern `a + b cos θ` about `+z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnalyticPattern {
    Omnidirectional,
    Cardioid,
    Hypercardioid,
    Subcardioid,
    Bidirectional,
}

impl AnalyticPattern {
    pub const ALL: [AnalyticPattern; 5] = [
        AnalyticPattern::Omnidirectional,
        AnalyticPattern::Cardioid,
        AnalyticPattern::Hypercardioid,
        AnalyticPattern::Subcardioid,
        AnalyticPattern::Bidirectional,
    ];

    /// `(a, b)` with `a + b = 1`.
    pub fn coefficients(self) -> (f64, f64) {
        match self {
            AnalyticPattern::Omnidirectional => (1.0, 0.0),
            AnalyticPattern::Cardioid => (0.5, 0.5),
            AnalyticPattern::Hypercardioid => (0.25, 0.75),
            AnalyticPattern::Subcardioid => (0.75, 0.25),
            AnalyticPattern::Bidirectional => (0.0, 1.0),
        }
    }

    /// Closed-form gain at polar angle `theta` from the axis.
    pub fn gain(self, theta: f64) -> f64 {
        let (a, b) = self.coefficients();
        a + b * theta.cos()
    }

    pub fn name(self) -> &'static str {
        match self {
            AnalyticPattern::Omnidirectional => "omnidirectional",
            AnalyticPattern::Cardioid => "cardioid",
            AnalyticPattern::Hypercardioid => "hypercardioid",
            AnalyticPattern::Subcardioid => "subcardioid",
            AnalyticPattern::Bidirectional => "bidirectional",
        }
    }
}

impl fmt::Display for AnalyticPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AnalyticPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|p| p.name() == key || (key == "omni" && *p == AnalyticPattern::Omnidirectional))
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown pattern '{s}' (expected one of omnidirectional, cardioid, hypercardioid, subcardioid, bidirectional)"
                ))
            })
    }
}

/// Coefficients of an analytic pattern: `γ₀⁰ = √(4π)·a`, `γ₁⁰ = √(4π/3)·b`.
pub fn pattern_to_sh(pattern: AnalyticPattern) -> ShMatrix {
    let (a, b) = pattern.coefficients();
    let mut c = ShMatrix::zeros(1);
    c[ShIndex { n: 0, m: 0 }] = Complex64::new((4.0 * PI).sqrt() * a, 0.0);
    c[ShIndex { n: 1, m: 0 }] = Complex64::new((4.0 * PI / 3.0).sqrt() * b, 0.0);
    c
}

/// Directional impulse responses sampled on a sphere of radius `radius`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasuredDirectivity {
    pub radius: f64,
    pub sample_rate: f64,
    /// `(θ, φ)` per channel.
    pub directions: Vec<(f64, f64)>,
    /// Optional quadrature weights, one per direction.
    pub weights: Option<Vec<f64>>,
    /// `responses[q][t]`.
    pub responses: Vec<Vec<f64>>,
}

impl MeasuredDirectivity {
    pub fn new(
        radius: f64,
        sample_rate: f64,
        directions: Vec<(f64, f64)>,
        weights: Option<Vec<f64>>,
        responses: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if !(radius > 0.0) || !(sample_rate > 0.0) {
            return Err(Error::Config(format!(
                "measurement radius and sample rate must be positive (got {radius}, {sample_rate})"
            )));
        }
        if directions.len() != responses.len() {
            return Err(Error::Config(format!(
                "{} directions but {} impulse responses",
                directions.len(),
                responses.len()
            )));
        }
        if let Some(w) = &weights {
            if w.len() != directions.len() {
                return Err(Error::Config("one quadrature weight per direction required".into()));
            }
        }
        let len = responses.first().map_or(0, Vec::len);
        if responses.iter().any(|r| r.len() != len) {
            return Err(Error::Config("impulse responses differ in length".into()));
        }
        if directions
            .iter()
            .any(|&(t, p)| !(0.0..=PI).contains(&t) || !p.is_finite())
        {
            return Err(Error::Config("direction angles out of range".into()));
        }
        Ok(Self {
            radius,
            sample_rate,
            directions,
            weights,
            responses,
        })
    }

    pub fn channels(&self) -> usize {
        self.directions.len()
    }

    pub fn len(&self) -> usize {
        self.responses.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Samples a coefficient sequence on `directions` (analysis inverse).
    pub fn synthesize(
        coeffs: &ShTimeSeries,
        radius: f64,
        directions: Vec<(f64, f64)>,
        weights: Option<Vec<f64>>,
    ) -> Result<Self> {
        let order = coeffs.order();
        let responses = directions
            .iter()
            .map(|&(t, p)| {
                let y = sh_basis(order, t, p);
                coeffs
                    .frames()
                    .iter()
                    .map(|f| f.as_slice().iter().zip(&y).map(|(c, y)| c * y).sum::<Complex64>().re)
                    .collect()
            })
            .collect();
        Self::new(radius, coeffs.fs(), directions, weights, responses)
    }
}

/// Options for projecting measured responses onto SH.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisOptions {
    /// Tikhonov parameter; zero means plain least squares.
    pub regularization: f64,
    /// Largest admissible condition number of the (unregularized) basis matrix.
    pub max_condition: f64,
    /// Apply the `4π r` gain and the `r / c` time advance.
    pub farfield_compensation: bool,
    /// Used only for the time advance.
    pub speed_of_sound: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            regularization: 0.0,
            max_condition: 1e4,
            farfield_compensation: false,
            speed_of_sound: 343.0,
        }
    }
}

/// Projects measured responses onto order-`order` SH coefficients.
///
/// Least squares (optionally Tikhonov-regularized) unless the grid declares
/// quadrature weights, in which case the weighted inner product is used.
pub fn dir_ir_to_sh(
    meas: &MeasuredDirectivity,
    order: usize,
    opts: &AnalysisOptions,
) -> Result<ShTimeSeries> {
    let q = meas.channels();
    let k = coeff_count(order);
    if q < k {
        return Err(Error::Config(format!(
            "{q} measurement directions cannot resolve order {order} (need at least {k})"
        )));
    }
    let mut y = DMatrix::<Complex64>::zeros(q, k);
    for (row, &(t, p)) in meas.directions.iter().enumerate() {
        for (col, v) in sh_basis(order, t, p).into_iter().enumerate() {
            y[(row, col)] = v;
        }
    }

    let projector: DMatrix<Complex64> = match &meas.weights {
        Some(w) => {
            let mut p = y.adjoint();
            for (col, wq) in w.iter().enumerate() {
                p.column_mut(col).scale_mut(*wq);
            }
            p
        }
        None => {
            let svd = y.clone().svd(true, true);
            let s = &svd.singular_values;
            let smax = s.max();
            let smin = s.min();
            let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
            if opts.regularization <= 0.0 && condition > opts.max_condition {
                return Err(Error::IllConditioned {
                    condition,
                    limit: opts.max_condition,
                });
            }
            let u = svd.u.as_ref().expect("left singular vectors requested");
            let vt = svd.v_t.as_ref().expect("right singular vectors requested");
            let lambda = opts.regularization.max(0.0);
            let mut inv = DMatrix::<Complex64>::zeros(s.len(), s.len());
            for i in 0..s.len() {
                let si = s[i];
                let g = if lambda > 0.0 {
                    si / (si * si + lambda)
                } else if si > 0.0 {
                    1.0 / si
                } else {
                    0.0
                };
                inv[(i, i)] = Complex64::new(g, 0.0);
            }
            vt.adjoint() * inv * u.adjoint()
        }
    };

    let (gain, advance) = if opts.farfield_compensation {
        (
            4.0 * PI * meas.radius,
            (meas.radius / opts.speed_of_sound * meas.sample_rate).round() as i64,
        )
    } else {
        (1.0, 0)
    };

    let frames = (0..meas.len())
        .map(|t| {
            let h: Vec<Complex64> = meas
                .responses
                .iter()
                .map(|r| Complex64::new(r[t] * gain, 0.0))
                .collect();
            let c = &projector * DMatrix::from_column_slice(q, 1, &h);
            ShMatrix::from_vec(order, c.as_slice().to_vec())
        })
        .collect::<Result<Vec<_>>>()?;
    ShTimeSeries::new(meas.sample_rate, -advance, order, frames)
}

/// Rotation of directivity coefficients, single-frame or time series.
pub trait RotateDirectivity: Sized {
    fn rotate_directivity(&self, angles: &EulerAngles) -> Self;
}

impl RotateDirectivity for ShMatrix {
    fn rotate_directivity(&self, angles: &EulerAngles) -> Self {
        ShRotation::new(self.order(), *angles).apply(self)
    }
}

impl RotateDirectivity for ShTimeSeries {
    fn rotate_directivity(&self, angles: &EulerAngles) -> Self {
        self.rotated(&ShRotation::new(self.order(), *angles))
    }
}

pub fn rotate_directivity<T: RotateDirectivity>(coeffs: &T, angles: &EulerAngles) -> T {
    coeffs.rotate_directivity(angles)
}

/// Analytic pattern or measured bundle.
#[derive(Debug, Clone, PartialEq)]
pub enum DirectivitySpec {
    Analytic(AnalyticPattern),
    Measured(MeasuredDirectivity),
}

/// A source: position in the room, orientation of its local `+z` axis, and
/// its directivity truncated to `order`.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceSpec {
    pub position: [f64; 3],
    pub orientation: EulerAngles,
    pub directivity: DirectivitySpec,
    pub order: usize,
    pub analysis: AnalysisOptions,
}

impl SourceSpec {
    /// Source with its axis pointing from `position` toward `target`.
    pub fn aimed_at(
        position: [f64; 3],
        target: [f64; 3],
        directivity: DirectivitySpec,
        order: usize,
    ) -> Self {
        let d = [
            target[0] - position[0],
            target[1] - position[1],
            target[2] - position[2],
        ];
        let (theta, phi) = crate::sh::direction_angles(d);
        Self {
            position,
            orientation: EulerAngles::pointing_to(theta, phi),
            directivity,
            order,
            analysis: AnalysisOptions::default(),
        }
    }

    /// `γᵥᵘ(τ)` in room orientation at sample rate `fs`.
    pub fn coefficients(&self, fs: f64) -> Result<ShTimeSeries> {
        let local = match &self.directivity {
            DirectivitySpec::Analytic(p) => {
                ShTimeSeries::impulse(fs, pattern_to_sh(*p).with_order(self.order))
            }
            DirectivitySpec::Measured(m) => {
                if (m.sample_rate - fs).abs() > 1e-9 * fs {
                    return Err(Error::Config(format!(
                        "directivity sampled at {} Hz but simulation runs at {fs} Hz",
                        m.sample_rate
                    )));
                }
                dir_ir_to_sh(m, self.order, &self.analysis)?
            }
        };
        Ok(local.rotate_directivity(&self.orientation))
    }
}

/// Deterministic order-5 loudspeaker-like directivity: omnidirectional at low
/// frequencies, increasingly forward-directed toward Nyquist, with a weak
/// off-axis asymmetry. Stands in for a measured dataset.
pub fn synthetic_loudspeaker(fs: f64) -> ShTimeSeries {
    const ORDER: usize = 5;
    let taps = 16;
    let mut frames = vec![ShMatrix::zeros(ORDER); taps];
    // degree-v response: a short low-pass for v = 0, band-pass/high-pass
    // shapes for higher degrees so the beam narrows with frequency
    for v in 0..=ORDER {
        let w = (4.0 * PI * (2 * v + 1) as f64).sqrt() / (ORDER + 1) as f64;
        let decay = 0.55 + 0.05 * v as f64;
        for t in 0..taps {
            let env = decay.powi(t as i32);
            let shape = if v == 0 {
                if t == 0 { 1.0 } else { 0.35 * env * (0.9 * t as f64).cos() }
            } else {
                let ph = PI * t as f64 * (0.3 + 0.1 * v as f64);
                if t == 0 { 0.6 } else { -0.6 * env * ph.cos() / (1.0 + 0.2 * v as f64) }
            };
            let axial = if v == 0 { (4.0 * PI).sqrt() * shape } else { w * shape };
            frames[t][ShIndex { n: v, m: 0 }] = Complex64::new(axial, 0.0);
            if v >= 1 {
                // γ_v^{-1} = -conj(γ_v^1) keeps the pattern real
                let side = 0.08 * w * shape;
                frames[t][ShIndex { n: v, m: 1 }] = Complex64::new(side, 0.0);
                frames[t][ShIndex { n: v, m: -1 }] = Complex64::new(-side, 0.0);
            }
        }
    }
    ShTimeSeries::new(fs, 0, ORDER, frames).expect("consistent frame orders")
}

/// The stand-in sampled on a 64-direction spiral at radius `radius`.
pub fn synthetic_loudspeaker_measurement(fs: f64, radius: f64) -> MeasuredDirectivity {
    let grid: Vec<(f64, f64)> = fibonacci_grid(64).iter().map(|p| (p.theta, p.phi)).collect();
    MeasuredDirectivity::synthesize(&synthetic_loudspeaker(fs), radius, grid, None)
        .expect("valid synthetic measurement")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pattern_coefficients() {
        let c = pattern_to_sh(AnalyticPattern::Cardioid);
        assert_relative_eq!(c.get(0, 0).re, PI.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(c.get(1, 0).re, (PI / 3.0).sqrt(), epsilon = 1e-15);
        let o = pattern_to_sh(AnalyticPattern::Omnidirectional);
        assert_relative_eq!(o.get(0, 0).re, (4.0 * PI).sqrt(), epsilon = 1e-15);
        assert_eq!(o.get(1, 0).norm(), 0.0);
        for p in AnalyticPattern::ALL {
            let (a, b) = p.coefficients();
            assert_eq!(a + b, 1.0);
            let c = pattern_to_sh(p);
            for idx in crate::sh::indices(1).filter(|i| i.m != 0) {
                assert_eq!(c[idx].norm(), 0.0);
            }
        }
    }

    #[test]
    fn patterns_synthesize_to_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for p in AnalyticPattern::ALL {
            let c = pattern_to_sh(p);
            for _ in 0..50 {
                let t = rng.gen_range(0.0..PI);
                let ph = rng.gen_range(0.0..2.0 * PI);
                let v = c.evaluate(t, ph);
                assert!(v.im.abs() < 1e-12);
                assert_relative_eq!(v.re, p.gain(t), epsilon = 1e-12);
            }
        }
        let c = pattern_to_sh(AnalyticPattern::Cardioid);
        assert!(c.evaluate(PI, 0.0).re.abs() < 1e-12);
        assert_relative_eq!(c.evaluate(0.0, 0.0).re, 1.0, epsilon = 1e-12);
        assert!(pattern_to_sh(AnalyticPattern::Bidirectional)
            .evaluate(PI / 2.0, 1.0)
            .norm()
            < 1e-12);
    }

    #[test]
    fn parse_names() {
        assert_eq!("Cardioid".parse::<AnalyticPattern>().unwrap(), AnalyticPattern::Cardioid);
        assert_eq!("omni".parse::<AnalyticPattern>().unwrap(), AnalyticPattern::Omnidirectional);
        assert!("figure8".parse::<AnalyticPattern>().is_err());
    }

    #[test]
    fn rotated_cardioid_peaks_at_target() {
        let c = pattern_to_sh(AnalyticPattern::Cardioid);
        let (t, p) = (1.1, 4.0);
        let r = rotate_directivity(&c, &EulerAngles::pointing_to(t, p));
        assert_relative_eq!(r.evaluate(t, p).re, 1.0, epsilon = 1e-9);
        assert_relative_eq!(r.norm_sqr(), c.norm_sqr(), epsilon = 1e-10);
        let back = crate::sh::unit_vector(t, p).map(|x| -x);
        let (bt, bp) = crate::sh::direction_angles(back);
        assert!(r.evaluate(bt, bp).norm() < 1e-9);
        assert_eq!(rotate_directivity(&c, &EulerAngles::IDENTITY).max_abs_diff(&c), 0.0);
    }

    #[test]
    fn constant_measurement_projects_to_omni() {
        let grid: Vec<(f64, f64)> = fibonacci_grid(64).iter().map(|p| (p.theta, p.phi)).collect();
        let responses = grid.iter().map(|_| vec![1.0, 0.0, 0.0]).collect();
        let m = MeasuredDirectivity::new(1.0, 48_000.0, grid, None, responses).unwrap();
        let s = dir_ir_to_sh(&m, 5, &AnalysisOptions::default()).unwrap();
        assert_relative_eq!(s.frames()[0].get(0, 0).re, (4.0 * PI).sqrt(), epsilon = 1e-10);
        for idx in crate::sh::indices(5).skip(1) {
            assert!(s.frames()[0][idx].norm() < 1e-10);
        }
    }

    #[test]
    fn too_few_directions_rejected() {
        let grid: Vec<(f64, f64)> = fibonacci_grid(35).iter().map(|p| (p.theta, p.phi)).collect();
        let responses = grid.iter().map(|_| vec![1.0]).collect();
        let m = MeasuredDirectivity::new(1.0, 48_000.0, grid, None, responses).unwrap();
        assert!(matches!(
            dir_ir_to_sh(&m, 5, &AnalysisOptions::default()),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn degenerate_grid_is_ill_conditioned() {
        // every direction on the equator: m-even/odd degrees are confounded
        let grid: Vec<(f64, f64)> = (0..40).map(|i| (PI / 2.0, i as f64 * 0.157)).collect();
        let responses = grid.iter().map(|_| vec![1.0]).collect();
        let m = MeasuredDirectivity::new(1.0, 48_000.0, grid, None, responses).unwrap();
        assert!(matches!(
            dir_ir_to_sh(&m, 2, &AnalysisOptions::default()),
            Err(Error::IllConditioned { .. })
        ));
        let opts = AnalysisOptions {
            regularization: 1e-3,
            ..Default::default()
        };
        assert!(dir_ir_to_sh(&m, 2, &opts).is_ok());
    }

    #[test]
    fn stand_in_round_trips() {
        let fs = 48_000.0;
        let meas = synthetic_loudspeaker_measurement(fs, 2.0);
        let back = dir_ir_to_sh(&meas, 5, &AnalysisOptions::default()).unwrap();
        assert!(back.max_abs_diff(&synthetic_loudspeaker(fs)) < 1e-9);
        // pattern is real on the sphere
        for f in back.frames() {
            assert!(f.evaluate(0.7, 2.2).im.abs() < 1e-12);
        }
    }

    #[test]
    fn farfield_compensation_scales_and_advances() {
        let fs = 48_000.0;
        let meas = synthetic_loudspeaker_measurement(fs, 2.0);
        let opts = AnalysisOptions {
            farfield_compensation: true,
            ..Default::default()
        };
        let s = dir_ir_to_sh(&meas, 5, &opts).unwrap();
        assert_eq!(s.start(), -(2.0f64 / 343.0 * fs).round() as i64);
        let plain = dir_ir_to_sh(&meas, 5, &AnalysisOptions::default()).unwrap();
        let g = s.frames()[0].get(0, 0) / plain.frames()[0].get(0, 0);
        assert_relative_eq!(g.re, 8.0 * PI, epsilon = 1e-9);
    }

    #[test]
    fn quadrature_weights_path() {
        let grid = crate::sh::gauss_product_grid(10);
        let dirs: Vec<_> = grid.iter().map(|p| (p.theta, p.phi)).collect();
        let w: Vec<_> = grid.iter().map(|p| p.weight).collect();
        let src = synthetic_loudspeaker(44_100.0);
        let meas = MeasuredDirectivity::synthesize(&src, 1.0, dirs, Some(w)).unwrap();
        let back = dir_ir_to_sh(&meas, 5, &AnalysisOptions::default()).unwrap();
        assert!(back.max_abs_diff(&src) < 1e-10);
    }

    #[test]
    fn source_aimed_at_target() {
        let s = SourceSpec::aimed_at(
            [1.0, 3.5, 2.1],
            [2.5, 3.5, 2.1],
            DirectivitySpec::Analytic(AnalyticPattern::Cardioid),
            5,
        );
        let c = s.coefficients(44_100.0).unwrap();
        assert_eq!(c.order(), 5);
        let f = &c.frames()[0];
        assert_relative_eq!(f.evaluate(PI / 2.0, 0.0).re, 1.0, epsilon = 1e-12);
        assert!(f.evaluate(PI / 2.0, PI).norm() < 1e-12);
    }
}
