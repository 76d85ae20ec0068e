//! Associated Legendre functions.
//!
//! Both the plain functions `P_n^m` (Condon–Shortley phase included) and the
//! orthonormalised kernel
//! `𝒫_n^m(x) = sqrt((2n+1)/4π · (n−m)!/(n+m)!) P_n^m(x)` are evaluated by
//! three-term recurrences in the degree. No factorial is ever formed.

use std::f64::consts::PI;

use crate::error::{Error, Result};

fn check_domain(n: usize, m: i64, x: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&x) || x.is_nan() {
        return Err(Error::Domain(format!("|x| must be <= 1, got {x}")));
    }
    if m.unsigned_abs() as usize > n {
        return Err(Error::Domain(format!("order {m} exceeds degree {n}")));
    }
    Ok(())
}

/// `P_n^m(x)` for `0 <= m <= n` with the Condon–Shortley phase,
/// so that `P_1^1(x) = -sqrt(1 - x^2)`.
pub fn assoc_legendre(n: usize, m: usize, x: f64) -> Result<f64> {
    check_domain(n, m as i64, x)?;
    let somx2 = ((1.0 - x) * (1.0 + x)).sqrt();
    // P_m^m = (-1)^m (2m-1)!! (1-x^2)^{m/2}
    let mut pmm = 1.0;
    let mut odd = 1.0;
    for _ in 0..m {
        pmm *= -odd * somx2;
        odd += 2.0;
    }
    if n == m {
        return Ok(pmm);
    }
    let mut pm1 = x * (2 * m + 1) as f64 * pmm;
    if n == m + 1 {
        return Ok(pm1);
    }
    let mut pm2 = pmm;
    for l in (m + 2)..=n {
        let p = ((2 * l - 1) as f64 * x * pm1 - (l + m - 1) as f64 * pm2) / (l - m) as f64;
        pm2 = pm1;
        pm1 = p;
    }
    Ok(pm1)
}

/// Orthonormalised Legendre kernel `𝒫_n^m(x)`; negative orders follow
/// `𝒫_n^{-m} = (-1)^m 𝒫_n^m`.
pub fn norm_legendre(n: usize, m: i64, x: f64) -> Result<f64> {
    check_domain(n, m, x)?;
    let table = NormLegendreTable::new(n, x);
    Ok(table.get(n, m))
}

/// All `𝒫_n^m(x)` for `0 <= n <= order`, `|m| <= n`, evaluated at one point.
#[derive(Debug, Clone)]
pub struct NormLegendreTable {
    order: usize,
    // m >= 0 only, triangular layout n(n+1)/2 + m
    values: Vec<f64>,
}

impl NormLegendreTable {
    /// Caller guarantees `|x| <= 1`.
    pub fn new(order: usize, x: f64) -> Self {
        let mut values = vec![0.0; (order + 1) * (order + 2) / 2];
        let tri = |n: usize, m: usize| n * (n + 1) / 2 + m;
        let somx2 = ((1.0 - x) * (1.0 + x)).max(0.0).sqrt();

        let mut pmm = 1.0 / (4.0 * PI).sqrt();
        for m in 0..=order {
            if m > 0 {
                pmm *= -((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * somx2;
            }
            values[tri(m, m)] = pmm;
            if m == order {
                break;
            }
            let mut p_prev = pmm;
            let mut p = x * ((2 * m + 3) as f64).sqrt() * pmm;
            values[tri(m + 1, m)] = p;
            for l in (m + 2)..=order {
                let (lf, mf) = (l as f64, m as f64);
                let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0))
                    .sqrt();
                let next = a * (x * p - b * p_prev);
                p_prev = p;
                p = next;
                values[tri(l, m)] = p;
            }
        }
        Self { order, values }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, n: usize, m: i64) -> f64 {
        let ma = m.unsigned_abs() as usize;
        debug_assert!(ma <= n && n <= self.order);
        let v = self.values[n * (n + 1) / 2 + ma];
        if m < 0 && ma % 2 == 1 {
            -v
        } else {
            v
        }
    }
}
