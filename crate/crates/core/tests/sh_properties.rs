use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use tdw_smir::ism::reflect_sh;
use tdw_smir::sh::{
    direction_angles, norm_legendre, rotate_sh, sph_bessel_j, sph_bessel_y, unit_vector, EulerAngles,
    ShMatrix,
};

fn coeffs(order: usize) -> impl Strategy<Value = ShMatrix> {
    let k = (order + 1) * (order + 1);
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), k)
        .prop_map(move |v| ShMatrix::from_vec(order, v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()).unwrap())
}

fn angles() -> impl Strategy<Value = EulerAngles> {
    (0.0..2.0 * PI, 0.0..PI, 0.0..2.0 * PI).prop_map(|(a, b, g)| EulerAngles::new(a, b, g).unwrap())
}

fn direction() -> impl Strategy<Value = (f64, f64)> {
    (0.0..PI, 0.0..2.0 * PI)
}

proptest! {
    #[test]
    fn rotation_equals_evaluation_in_rotated_frame(c in coeffs(5), r in angles(), (t, p) in direction()) {
        // (R f)(x) = f(R⁻¹ x)
        let rotated = rotate_sh(&c, &r);
        let x = unit_vector(t, p);
        let (bt, bp) = direction_angles(r.inverse().rotate_vector(x));
        prop_assert!((rotated.evaluate(t, p) - c.evaluate(bt, bp)).norm() < 1e-9);
    }

    #[test]
    fn rotation_preserves_degree_energy(c in coeffs(5), r in angles()) {
        let rotated = rotate_sh(&c, &r);
        for n in 0..=5 {
            prop_assert!((rotated.degree_energy(n) - c.degree_energy(n)).abs() < 1e-10 * (1.0 + c.degree_energy(n)));
        }
    }

    #[test]
    fn rotation_then_inverse_is_identity(c in coeffs(4), r in angles()) {
        let back = rotate_sh(&rotate_sh(&c, &r), &r.inverse());
        prop_assert!(back.max_abs_diff(&c) < 1e-10);
    }

    #[test]
    fn reflections_commute_and_are_involutions(c in coeffs(5), a in any::<[bool; 3]>(), b in any::<[bool; 3]>()) {
        let ab = reflect_sh(&reflect_sh(&c, a), b);
        let ba = reflect_sh(&reflect_sh(&c, b), a);
        prop_assert!(ab.max_abs_diff(&ba) < 1e-15);
        prop_assert!(reflect_sh(&reflect_sh(&c, a), a).max_abs_diff(&c) < 1e-15);
    }

    #[test]
    fn negative_order_symmetry(n in 0usize..10, m in 0i64..10, x in -1.0f64..1.0) {
        prop_assume!(m as usize <= n);
        let s = if m % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!((norm_legendre(n, -m, x).unwrap() - s * norm_legendre(n, m, x).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn bessel_wronskian(n in 0usize..7, x in 0.3f64..60.0) {
        // j_n y_{n+1} - j_{n+1} y_n = -1/x²
        let w = sph_bessel_j(n, x).unwrap() * sph_bessel_y(n + 1, x).unwrap()
            - sph_bessel_j(n + 1, x).unwrap() * sph_bessel_y(n, x).unwrap();
        prop_assert!((w * x * x + 1.0).abs() < 1e-9);
    }
}
