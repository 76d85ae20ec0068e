//! Spherical Bessel and Hankel functions of integer order and real argument.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// `j_0 … j_nmax` at `x >= 0`.
///
/// Upward recurrence is used when `x > nmax`, Miller's downward recurrence
/// otherwise, normalised against whichever of `j_0`, `j_1` is larger.
pub fn sph_bessel_j_all(nmax: usize, x: f64) -> Result<Vec<f64>> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("spherical Bessel j needs x >= 0, got {x}")));
    }
    let mut out = vec![0.0; nmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return Ok(out);
    }
    if x < 1e-4 {
        // leading terms of the power series
        let mut lead = 1.0;
        for (n, o) in out.iter_mut().enumerate() {
            if n > 0 {
                lead *= x / (2 * n + 1) as f64;
            }
            *o = lead * (1.0 - x * x / (2.0 * (2 * n + 3) as f64));
        }
        return Ok(out);
    }
    let (s, c) = x.sin_cos();
    let j0 = s / x;
    let j1 = s / (x * x) - c / x;
    if x > nmax as f64 {
        out[0] = j0;
        if nmax >= 1 {
            out[1] = j1;
        }
        for n in 1..nmax {
            out[n + 1] = (2 * n + 1) as f64 / x * out[n] - out[n - 1];
        }
        return Ok(out);
    }
    let start = nmax + 20 + (x as usize);
    let mut next = 0.0;
    let mut cur = 1e-30;
    let mut scratch = vec![0.0; start + 1];
    scratch[start] = cur;
    for n in (1..=start).rev() {
        let prev = (2 * n + 1) as f64 / x * cur - next;
        next = cur;
        cur = prev;
        scratch[n - 1] = cur;
        if cur.abs() > 1e250 {
            for v in scratch[n - 1..].iter_mut() {
                *v *= 1e-250;
            }
            next *= 1e-250;
            cur *= 1e-250;
        }
    }
    let scale = if j0.abs() >= j1.abs() {
        j0 / scratch[0]
    } else {
        j1 / scratch[1]
    };
    for (o, v) in out.iter_mut().zip(&scratch) {
        *o = v * scale;
    }
    Ok(out)
}

/// `y_0 … y_nmax` at `x > 0` by upward recurrence.
pub fn sph_bessel_y_all(nmax: usize, x: f64) -> Result<Vec<f64>> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("spherical Bessel y needs x > 0, got {x}")));
    }
    let (s, c) = x.sin_cos();
    let mut out = vec![0.0; nmax + 1];
    out[0] = -c / x;
    if nmax >= 1 {
        out[1] = -c / (x * x) - s / x;
    }
    for n in 1..nmax {
        out[n + 1] = (2 * n + 1) as f64 / x * out[n] - out[n - 1];
    }
    Ok(out)
}

pub fn sph_bessel_j(n: usize, x: f64) -> Result<f64> {
    Ok(sph_bessel_j_all(n, x)?[n])
}

pub fn sph_bessel_y(n: usize, x: f64) -> Result<f64> {
    Ok(sph_bessel_y_all(n, x)?[n])
}

/// `h_n(x) = j_n(x) + i y_n(x)` (first kind, outgoing for `e^{-iωt}`).
pub fn sph_hankel(n: usize, x: f64) -> Result<Complex64> {
    if x == 0.0 {
        return Err(Error::Domain("spherical Hankel is singular at x = 0".into()));
    }
    Ok(Complex64::new(sph_bessel_j(n, x)?, sph_bessel_y(n, x)?))
}

/// `h_n^(2)(x) = j_n(x) - i y_n(x)` for all orders up to `nmax`
/// (outgoing for the `e^{+iωt}` convention).
pub fn sph_hankel2_all(nmax: usize, x: f64) -> Result<Vec<Complex64>> {
    if x == 0.0 {
        return Err(Error::Domain("spherical Hankel is singular at x = 0".into()));
    }
    let j = sph_bessel_j_all(nmax, x)?;
    let y = sph_bessel_y_all(nmax, x)?;
    Ok(j.iter().zip(&y).map(|(a, b)| Complex64::new(*a, -b)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn closed_forms() {
        assert_eq!(sph_bessel_j(0, 0.0).unwrap(), 1.0);
        assert_eq!(sph_bessel_j(3, 0.0).unwrap(), 0.0);
        let x: f64 = 2.0;
        let j1 = x.sin() / (x * x) - x.cos() / x;
        assert_relative_eq!(sph_bessel_j(1, x).unwrap(), j1, epsilon = 1e-15);
        assert_relative_eq!(j1, 0.435_398, epsilon = 1e-6);
        // j2(x) = (3/x^2 - 1) sin x / x - 3 cos x / x^2
        for x in [0.3f64, 1.7, 9.0, 40.0] {
            let j2 = (3.0 / (x * x) - 1.0) * x.sin() / x - 3.0 * x.cos() / (x * x);
            assert_relative_eq!(sph_bessel_j(2, x).unwrap(), j2, max_relative = 1e-12);
        }
    }

    #[test]
    fn wronskian() {
        for x in [0.5, 5.0, 50.0] {
            let j = sph_bessel_j_all(7, x).unwrap();
            let y = sph_bessel_y_all(7, x).unwrap();
            for n in 1..=6 {
                let jd = j[n - 1] - (n + 1) as f64 / x * j[n];
                let yd = y[n - 1] - (n + 1) as f64 / x * y[n];
                let w = j[n] * yd - jd * y[n];
                assert!((w - 1.0 / (x * x)).abs() < 1e-10, "n={n} x={x} w={w}");
            }
            let w0 = j[0] * (-y[1]) - (-j[1]) * y[0];
            assert!((w0 - 1.0 / (x * x)).abs() < 1e-10);
        }
    }

    #[test]
    fn small_argument_series_continuity() {
        let a = sph_bessel_j_all(5, 0.999e-4).unwrap();
        let b = sph_bessel_j_all(5, 1.001e-4).unwrap();
        for n in 0..=5 {
            assert_relative_eq!(a[n], b[n], max_relative = 1e-2);
        }
    }

    #[test]
    fn hankel_domain_and_conjugates() {
        assert!(sph_hankel(0, 0.0).is_err());
        assert!(sph_bessel_y(0, 0.0).is_err());
        assert!(sph_bessel_j(0, -1.0).is_err());
        let h1 = sph_hankel(2, 3.0).unwrap();
        let h2 = sph_hankel2_all(2, 3.0).unwrap()[2];
        assert_relative_eq!((h1.conj() - h2).norm(), 0.0, epsilon = 1e-15);
        // h0^(2)(x) = i e^{-ix} / x
        let x: f64 = 1.3;
        let expect = Complex64::new(0.0, 1.0) * Complex64::from_polar(1.0, -x) / x;
        assert_relative_eq!((sph_hankel2_all(0, x).unwrap()[0] - expect).norm(), 0.0, epsilon = 1e-15);
    }
}
