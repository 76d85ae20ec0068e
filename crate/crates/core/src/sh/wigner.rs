//! Rotations in the SH domain.
//!
//! Euler angles follow the z-y-z convention, `R = R_z(α) R_y(β) R_z(γ)`
//! acting on vectors. Rotating a function `f` by `R` means
//! `(R f)(x̂) = f(R⁻¹ x̂)`; its degree-`n` coefficients are `D^n(R) c_n` with
//! `D^n_{m'm} = e^{-im'α} d^n_{m'm}(β) e^{-imγ}`.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::harmonics::{flat_index, ShMatrix};
use crate::error::{Error, Result};

/// z-y-z Euler angles in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

impl Default for EulerAngles {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl EulerAngles {
    pub const IDENTITY: EulerAngles = EulerAngles {
        alpha: 0.0,
        beta: 0.0,
        gamma: 0.0,
    };

    /// Validates `β ∈ [0, π]` and wraps α, γ into `[0, 2π)`.
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&beta) || !alpha.is_finite() || !gamma.is_finite() {
            return Err(Error::Domain(format!("beta must lie in [0, π], got {beta}")));
        }
        Ok(Self {
            alpha: wrap_angle(alpha),
            beta,
            gamma: wrap_angle(gamma),
        })
    }

    /// Rotation taking `+z` onto the direction `(θ, φ)`.
    pub fn pointing_to(theta: f64, phi: f64) -> Self {
        Self {
            alpha: wrap_angle(phi),
            beta: theta.clamp(0.0, PI),
            gamma: 0.0,
        }
    }

    pub fn to_matrix(&self) -> Matrix3<f64> {
        rot_z(self.alpha) * rot_y(self.beta) * rot_z(self.gamma)
    }

    /// Recovers angles from a proper rotation matrix.
    pub fn from_matrix(r: &Matrix3<f64>) -> Self {
        let cb = r[(2, 2)].clamp(-1.0, 1.0);
        let beta = cb.acos();
        let sb = beta.sin();
        if sb > 1e-12 {
            let alpha = r[(1, 2)].atan2(r[(0, 2)]);
            let gamma = r[(2, 1)].atan2(-r[(2, 0)]);
            Self {
                alpha: wrap_angle(alpha),
                beta,
                gamma: wrap_angle(gamma),
            }
        } else if cb > 0.0 {
            // R = R_z(α + γ)
            let a = r[(1, 0)].atan2(r[(0, 0)]);
            Self {
                alpha: wrap_angle(a),
                beta: 0.0,
                gamma: 0.0,
            }
        } else {
            // R = R_z(α) R_y(π) R_z(γ) = R_z(α - γ) R_y(π)
            let a = (-r[(0, 1)]).atan2(-r[(0, 0)]);
            Self {
                alpha: wrap_angle(a),
                beta: PI,
                gamma: 0.0,
            }
        }
    }

    pub fn inverse(&self) -> Self {
        // R^-1 = R_z(-γ) R_y(-β) R_z(-α) = R_z(π-γ) R_y(β) R_z(-α-π)
        Self {
            alpha: wrap_angle(PI - self.gamma),
            beta: self.beta,
            gamma: wrap_angle(-self.alpha - PI),
        }
    }

    /// Angles of `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &EulerAngles) -> Self {
        Self::from_matrix(&(self.to_matrix() * other.to_matrix()))
    }

    pub fn rotate_vector(&self, v: [f64; 3]) -> [f64; 3] {
        let w = self.to_matrix() * Vector3::new(v[0], v[1], v[2]);
        [w[0], w[1], w[2]]
    }
}

fn rot_z(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

fn rot_y(b: f64) -> Matrix3<f64> {
    let (s, c) = b.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Jacobi polynomial `P_k^{(a,b)}(x)` by the standard three-term recurrence.
fn jacobi(k: usize, a: f64, b: f64, x: f64) -> f64 {
    let mut p0 = 1.0;
    if k == 0 {
        return p0;
    }
    let mut p1 = (a + 1.0) + (a + b + 2.0) * (x - 1.0) / 2.0;
    for j in 2..=k {
        let j = j as f64;
        let s = 2.0 * j + a + b;
        let c1 = 2.0 * j * (j + a + b) * (s - 2.0);
        let c2 = (s - 1.0) * (s * (s - 2.0) * x + a * a - b * b);
        let c3 = 2.0 * (j + a - 1.0) * (j + b - 1.0) * s;
        let p2 = (c2 * p1 - c3 * p0) / c1;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Wigner small-d matrix `d^n_{m'm}(β)`, row `m'+n`, column `m+n`.
pub fn wigner_small_d(n: usize, beta: f64) -> DMatrix<f64> {
    let dim = 2 * n + 1;
    let j = n as i64;
    let (sh, ch) = (beta / 2.0).sin_cos();
    let x = beta.cos();
    DMatrix::from_fn(dim, dim, |row, col| {
        let mp = row as i64 - j;
        let m = col as i64 - j;
        let candidates = [j + m, j - m, j + mp, j - mp];
        let k = *candidates.iter().min().unwrap();
        let (a, lambda) = if k == j + m {
            (mp - m, mp - m)
        } else if k == j - m {
            (m - mp, 0)
        } else if k == j + mp {
            (m - mp, 0)
        } else {
            (mp - m, mp - m)
        };
        let b = 2 * j - 2 * k - a;
        let (k, a, b) = (k as usize, a as usize, b as usize);
        let norm = (binomial(2 * n - k, k + a) / binomial(k + b, b)).sqrt();
        let sign = if lambda.rem_euclid(2) == 1 { -1.0 } else { 1.0 };
        sign * norm * sh.powi(a as i32) * ch.powi(b as i32) * jacobi(k, a as f64, b as f64, x)
    })
}

/// Wigner D-matrix of degree `n`.
pub fn wigner_d_matrix(n: usize, angles: &EulerAngles) -> DMatrix<Complex64> {
    let d = wigner_small_d(n, angles.beta);
    let j = n as i64;
    DMatrix::from_fn(2 * n + 1, 2 * n + 1, |row, col| {
        let mp = (row as i64 - j) as f64;
        let m = (col as i64 - j) as f64;
        Complex64::from_polar(d[(row, col)], -mp * angles.alpha - m * angles.gamma)
    })
}

/// Per-degree D-matrices for a fixed rotation, ready to apply to coefficient sets.
#[derive(Debug, Clone)]
pub struct ShRotation {
    angles: EulerAngles,
    blocks: Vec<DMatrix<Complex64>>,
}

impl ShRotation {
    pub fn new(order: usize, angles: EulerAngles) -> Self {
        let blocks = (0..=order).map(|n| wigner_d_matrix(n, &angles)).collect();
        Self { angles, blocks }
    }

    pub fn angles(&self) -> EulerAngles {
        self.angles
    }

    pub fn order(&self) -> usize {
        self.blocks.len() - 1
    }

    pub fn apply_slice(&self, order: usize, input: &[Complex64], output: &mut [Complex64]) {
        assert!(order <= self.order(), "rotation prepared for a lower order");
        for n in 0..=order {
            let d = &self.blocks[n];
            let base = flat_index(n, -(n as i64));
            let dim = 2 * n + 1;
            for r in 0..dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for c in 0..dim {
                    acc += d[(r, c)] * input[base + c];
                }
                output[base + r] = acc;
            }
        }
    }

    pub fn apply(&self, coeffs: &ShMatrix) -> ShMatrix {
        let mut out = ShMatrix::zeros(coeffs.order());
        self.apply_slice(coeffs.order(), coeffs.as_slice(), out.as_mut_slice());
        out
    }
}

/// Rotates a coefficient set by `angles`.
pub fn rotate_sh(coeffs: &ShMatrix, angles: &EulerAngles) -> ShMatrix {
    ShRotation::new(coeffs.order(), *angles).apply(coeffs)
}
