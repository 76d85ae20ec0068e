//! Complex orthonormal spherical harmonics with the Condon–Shortley phase,
//! `Y_n^m(θ, φ) = 𝒫_n^m(cos θ) e^{imφ}`.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul};

use num_complex::Complex64;

use super::legendre::NormLegendreTable;
use crate::error::{Error, Result};

/// Degree/order pair `(n, m)` with `|m| <= n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ShIndex {
    pub n: usize,
    pub m: i64,
}

impl ShIndex {
    pub fn new(n: usize, m: i64) -> Result<Self> {
        if m.unsigned_abs() as usize > n {
            return Err(Error::Domain(format!("order {m} exceeds degree {n}")));
        }
        Ok(Self { n, m })
    }

    /// Position in the flat `(N+1)^2` layout, `n^2 + n + m`.
    #[inline]
    pub fn flat(self) -> usize {
        flat_index(self.n, self.m)
    }

    pub fn from_flat(i: usize) -> Self {
        let n = (i as f64).sqrt() as usize;
        let n = if (n + 1) * (n + 1) <= i { n + 1 } else { n };
        Self {
            n,
            m: i as i64 - (n * n + n) as i64,
        }
    }
}

#[inline]
pub fn flat_index(n: usize, m: i64) -> usize {
    ((n * n + n) as i64 + m) as usize
}

/// Number of coefficients for truncation order `order`.
#[inline]
pub fn coeff_count(order: usize) -> usize {
    (order + 1) * (order + 1)
}

/// All `(n, m)` pairs up to `order` in flat order.
pub fn indices(order: usize) -> impl Iterator<Item = ShIndex> {
    (0..=order).flat_map(|n| (-(n as i64)..=n as i64).map(move |m| ShIndex { n, m }))
}

/// Coefficients of one function on the sphere, truncated at degree `order`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShMatrix {
    order: usize,
    coeffs: Vec<Complex64>,
}

impl ShMatrix {
    pub fn zeros(order: usize) -> Self {
        Self {
            order,
            coeffs: vec![Complex64::new(0.0, 0.0); coeff_count(order)],
        }
    }

    pub fn from_vec(order: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != coeff_count(order) {
            return Err(Error::Config(format!(
                "order {order} needs {} coefficients, got {}",
                coeff_count(order),
                coeffs.len()
            )));
        }
        Ok(Self { order, coeffs })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn get(&self, n: usize, m: i64) -> Complex64 {
        if n > self.order {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs[flat_index(n, m)]
    }

    /// Copy truncated or zero-padded to `order`.
    pub fn with_order(&self, order: usize) -> Self {
        let mut out = Self::zeros(order);
        let k = coeff_count(order.min(self.order));
        out.coeffs[..k].copy_from_slice(&self.coeffs[..k]);
        out
    }

    /// `f(θ, φ) = Σ c_n^m Y_n^m(θ, φ)`.
    pub fn evaluate(&self, theta: f64, phi: f64) -> Complex64 {
        let basis = sh_basis(self.order, theta, phi);
        self.coeffs.iter().zip(&basis).map(|(c, y)| c * y).sum()
    }

    /// Sum of squared magnitudes of degree `n`.
    pub fn degree_energy(&self, n: usize) -> f64 {
        (-(n as i64)..=n as i64)
            .map(|m| self.get(n, m).norm_sqr())
            .sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn scale(&mut self, s: f64) {
        for c in &mut self.coeffs {
            *c *= s;
        }
    }

    pub fn max_abs_diff(&self, other: &ShMatrix) -> f64 {
        let order = self.order.max(other.order);
        indices(order)
            .map(|i| (self.get(i.n, i.m) - other.get(i.n, i.m)).norm())
            .fold(0.0, f64::max)
    }
}

impl Index<ShIndex> for ShMatrix {
    type Output = Complex64;
    fn index(&self, i: ShIndex) -> &Complex64 {
        &self.coeffs[i.flat()]
    }
}

impl IndexMut<ShIndex> for ShMatrix {
    fn index_mut(&mut self, i: ShIndex) -> &mut Complex64 {
        &mut self.coeffs[i.flat()]
    }
}

impl AddAssign<&ShMatrix> for ShMatrix {
    fn add_assign(&mut self, rhs: &ShMatrix) {
        assert_eq!(self.order, rhs.order, "SH order mismatch");
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}

impl Add<&ShMatrix> for &ShMatrix {
    type Output = ShMatrix;
    fn add(self, rhs: &ShMatrix) -> ShMatrix {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Mul<Complex64> for &ShMatrix {
    type Output = ShMatrix;
    fn mul(self, rhs: Complex64) -> ShMatrix {
        ShMatrix {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c * rhs).collect(),
        }
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(Error::Domain(format!("theta must lie in [0, π], got {theta}")));
    }
    Ok(())
}

/// `Y_n^m(θ, φ)`.
pub fn sph_harmonic(n: usize, m: i64, theta: f64, phi: f64) -> Result<Complex64> {
    check_theta(theta)?;
    ShIndex::new(n, m)?;
    let table = NormLegendreTable::new(n, theta.cos());
    Ok(table.get(n, m) * Complex64::from_polar(1.0, m as f64 * phi))
}

/// Every `Y_n^m(θ, φ)` up to `order`, in flat order.
pub fn sh_basis(order: usize, theta: f64, phi: f64) -> Vec<Complex64> {
    let table = NormLegendreTable::new(order, theta.cos().clamp(-1.0, 1.0));
    let mut out = Vec::with_capacity(coeff_count(order));
    let phases: Vec<Complex64> = (0..=order)
        .map(|m| Complex64::from_polar(1.0, m as f64 * phi))
        .collect();
    for n in 0..=order {
        for m in -(n as i64)..=n as i64 {
            let e = if m >= 0 {
                phases[m as usize]
            } else {
                phases[(-m) as usize].conj()
            };
            out.push(table.get(n, m) * e);
        }
    }
    out
}

/// Spherical angles `(θ, φ)` of a non-zero vector; θ from +z, φ from +x toward +y.
pub fn direction_angles(v: [f64; 3]) -> (f64, f64) {
    let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    let theta = (v[2] / r).clamp(-1.0, 1.0).acos();
    let phi = v[1].atan2(v[0]);
    (theta, phi)
}

/// Unit vector for spherical angles `(θ, φ)`.
pub fn unit_vector(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn flat_index_roundtrip() {
        for (i, idx) in indices(7).enumerate() {
            assert_eq!(idx.flat(), i);
            assert_eq!(ShIndex::from_flat(i), idx);
        }
        assert!(ShIndex::new(2, 3).is_err());
    }

    #[test]
    fn known_values() {
        let y00 = sph_harmonic(0, 0, 1.1, 2.2).unwrap();
        assert_relative_eq!(y00.re, 1.0 / (4.0 * PI).sqrt(), epsilon = 1e-15);
        assert_eq!(y00.im, 0.0);
        let y10 = sph_harmonic(1, 0, 0.0, 0.0).unwrap();
        assert_relative_eq!(y10.re, (3.0 / (4.0 * PI)).sqrt(), epsilon = 1e-15);
        // Y_1^1 = -sqrt(3/8π) sinθ e^{iφ}
        let y11 = sph_harmonic(1, 1, 0.7, 0.3).unwrap();
        let expect = Complex64::from_polar(-(3.0 / (8.0 * PI)).sqrt() * 0.7f64.sin(), 0.3);
        assert_relative_eq!((y11 - expect).norm(), 0.0, epsilon = 1e-15);
        assert!(sph_harmonic(1, 0, -0.1, 0.0).is_err());
    }

    #[test]
    fn conjugate_symmetry() {
        for idx in indices(5) {
            let a = sph_harmonic(idx.n, idx.m, 0.9, 1.7).unwrap();
            let b = sph_harmonic(idx.n, -idx.m, 0.9, 1.7).unwrap();
            let sign = if idx.m % 2 == 0 { 1.0 } else { -1.0 };
            assert_relative_eq!((b - a.conj() * sign).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn basis_matches_single_evaluation() {
        let b = sh_basis(6, 2.3, -0.4);
        for idx in indices(6) {
            let y = sph_harmonic(idx.n, idx.m, 2.3, -0.4).unwrap();
            assert_relative_eq!((b[idx.flat()] - y).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn angles_roundtrip() {
        let (t, p) = direction_angles(unit_vector(1.2, -2.0));
        assert_relative_eq!(t, 1.2, epsilon = 1e-14);
        assert_relative_eq!(p, -2.0, epsilon = 1e-14);
    }
}
