//! Spherical-harmonic machinery: Legendre kernels, harmonics, rotations and
//! the radial functions used by the frequency-domain reference.

pub mod bessel;
pub mod grids;
pub mod harmonics;
pub mod legendre;
pub mod wigner;

pub use bessel::{sph_bessel_j, sph_bessel_y, sph_hankel};
pub use harmonics::{
    coeff_count, direction_angles, flat_index, indices, sh_basis, sph_harmonic, unit_vector,
    ShIndex, ShMatrix,
};
pub use grids::{fibonacci_grid, gauss_product_grid, GridPoint};
pub use legendre::{assoc_legendre, norm_legendre, NormLegendreTable};
pub use wigner::{rotate_sh, wigner_d_matrix, wigner_small_d, EulerAngles, ShRotation};
