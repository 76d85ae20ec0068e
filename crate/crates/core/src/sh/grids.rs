//! Spherical sampling grids.

use std::f64::consts::PI;

use crate::quadrature::GaussLegendre;

/// Direction on the sphere with an optional quadrature weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub theta: f64,
    pub phi: f64,
    pub weight: f64,
}

/// Near-uniform spiral of `q` directions; weights are `4π / q`.
pub fn fibonacci_grid(q: usize) -> Vec<GridPoint> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..q)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / q as f64;
            GridPoint {
                theta: z.clamp(-1.0, 1.0).acos(),
                phi: (golden * i as f64).rem_euclid(2.0 * PI),
                weight: 4.0 * PI / q as f64,
            }
        })
        .collect()
}

/// Gauss–Legendre in `cos θ` times a uniform azimuth grid; integrates
/// products of harmonics up to degree `order` each exactly.
pub fn gauss_product_grid(order: usize) -> Vec<GridPoint> {
    let rule = GaussLegendre::new(order + 1);
    let n_phi = 2 * order + 2;
    let mut out = Vec::with_capacity(rule.nodes.len() * n_phi);
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        for j in 0..n_phi {
            out.push(GridPoint {
                theta: x.acos(),
                phi: 2.0 * PI * j as f64 / n_phi as f64,
                weight: w * 2.0 * PI / n_phi as f64,
            });
        }
    }
    out
}
