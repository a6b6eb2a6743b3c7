//! Spherical special functions: harmonics, Bessel/Hankel functions, Wigner-3j
//! symbols, Gaunt coefficients and sphere quadratures.

mod bessel;
mod harmonics;
mod quadrature;
mod wigner;

pub use bessel::{
    bn_radial, bn_radial_limit, sph_bessel_j, sph_bessel_j_all, sph_bessel_j_deriv, sph_bessel_y, sph_bessel_y_deriv,
    sph_hankel1, sph_hankel1_deriv, sph_hankel2, ArrayKind,
};
pub use harmonics::{acn_index, legendre_p, mode_count, modes, sph_harmonic, sph_harmonics, Direction, ModeIndex};
pub use quadrature::{gauss_legendre, random_rotation, SphereQuadrature};
pub use wigner::{gaunt_w, wigner3j};

use num_complex::Complex64;

/// `i^p` for any integer power.
pub fn ipow(p: i64) -> Complex64 {
    match p.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}
