use std::f64::consts::PI;

use num_complex::Complex64;

use crate::array::{floored_bn, ArrayGeometry, BesselFloorPolicy};
use crate::error::{Error, Result};
use crate::sph::{gaunt_w, ipow, sph_bessel_j, sph_hankel2, sph_harmonics, Direction, ModeIndex, SphereQuadrature};

fn c_nn(a: ModeIndex, b: ModeIndex) -> Complex64 {
    ipow(a.n as i64 - b.n as i64) * (16.0 * PI * PI)
}

fn y_pair(a: ModeIndex, b: ModeIndex, doa: Direction) -> (Complex64, Complex64) {
    let order = a.n.max(b.n) as usize;
    let y = sph_harmonics(order, doa.theta, doa.phi);
    (y[a.acn()], y[b.acn()])
}

/// Direct-path entry `16 pi^2 i^(n-n') Y*_nm(y) Y_n'm'(y)`.
pub fn upsilon_farfield(a: ModeIndex, b: ModeIndex, doa: Direction) -> Complex64 {
    let (ya, yb) = y_pair(a, b, doa);
    c_nn(a, b) * ya.conj() * yb
}

/// Near-field entry `k^2 h_n^(2)(k r_l) h_n'^(2)*(k r_l) Y*_nm(y) Y_n'm'(y)`.
pub fn upsilon_nearfield(a: ModeIndex, b: ModeIndex, doa: Direction, range: f64, k: f64) -> Result<Complex64> {
    if !(range > 0.0) {
        return Err(Error::Domain(format!("source range must be positive, got {range}")));
    }
    if !(k > 0.0) {
        return Err(Error::Domain(format!("wavenumber must be positive, got {k}")));
    }
    let ha = sph_hankel2(a.n, k * range)?;
    let hb = sph_hankel2(b.n, k * range)?;
    let (ya, yb) = y_pair(a, b, doa);
    Ok(ha * hb.conj() * ya.conj() * yb * (k * k))
}

/// Reverberant-power entry `16 pi^2 i^(n-n') W_{v,n,n'}^{u,m,m'}`.
pub fn psi_coeff(a: ModeIndex, b: ModeIndex, vu: ModeIndex) -> Complex64 {
    c_nn(a, b) * gaunt_w(vu.n, vu.m, a.n, a.m, b.n, b.m)
}

/// Diffuse-noise entry from the closed form
/// `(4 pi)^(3/2) i^(n-n'+2m+2m') j_n j_n' W_{n,n',0}^{-m,-m',0} / |b~_n|^2`.
pub fn omega_closed(
    a: ModeIndex,
    b: ModeIndex,
    k: f64,
    geometry: &ArrayGeometry,
    policy: &BesselFloorPolicy,
) -> Result<Complex64> {
    let w = gaunt_w(a.n, -a.m, b.n, -b.m, 0, 0);
    if w == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let kr = k * geometry.radius();
    let bn = floored_bn(a.n, k, geometry, policy)?;
    let mag2 = bn.norm_sqr();
    if mag2 == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let phase = ipow(a.n as i64 - b.n as i64 + 2 * a.m as i64 + 2 * b.m as i64);
    let j = sph_bessel_j(a.n, kr) * sph_bessel_j(b.n, kr);
    Ok(phase * ((4.0 * PI).powf(1.5) * j * w / mag2))
}

/// Diffuse-noise entry by direct double summation of the `j_0` coherence over a sphere quadrature.
pub fn omega_quadrature(
    a: ModeIndex,
    b: ModeIndex,
    k: f64,
    geometry: &ArrayGeometry,
    policy: &BesselFloorPolicy,
    quad: &SphereQuadrature,
) -> Result<Complex64> {
    let ba = floored_bn(a.n, k, geometry, policy)?;
    let bb = floored_bn(b.n, k, geometry, policy)?;
    let den = ba * bb.conj();
    if den.norm() == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let order = a.n.max(b.n) as usize;
    let r = geometry.radius();
    let pts: Vec<[f64; 3]> = quad.points.iter().map(|d| d.unit_vector().map(|c| c * r)).collect();
    let ys: Vec<(Complex64, Complex64)> = quad
        .points
        .iter()
        .map(|d| {
            let y = sph_harmonics(order, d.theta, d.phi);
            (y[a.acn()].conj(), y[b.acn()])
        })
        .collect();
    let mut sum = Complex64::new(0.0, 0.0);
    for (p, (wp, (ya, _))) in pts.iter().zip(quad.weights.iter().zip(&ys)) {
        let mut inner = Complex64::new(0.0, 0.0);
        for (p2, (wp2, (_, yb))) in pts.iter().zip(quad.weights.iter().zip(&ys)) {
            let d = ((p[0] - p2[0]).powi(2) + (p[1] - p2[1]).powi(2) + (p[2] - p2[2]).powi(2)).sqrt();
            inner += yb * (wp2 * sph_bessel_j(0, k * d));
        }
        sum += ya * inner * *wp;
    }
    Ok(sum / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sph::ArrayKind;

    fn mi(n: u32, m: i32) -> ModeIndex {
        ModeIndex::new(n, m).unwrap()
    }

    #[test]
    fn upsilon_values() {
        let d = Direction::new(1.1, 2.3).unwrap();
        let v = upsilon_farfield(mi(0, 0), mi(0, 0), d);
        assert!((v.re - 4.0 * PI).abs() < 1e-12 && v.im.abs() < 1e-12);
        let eq = Direction::new(PI / 2.0, 0.4).unwrap();
        assert!(upsilon_farfield(mi(1, 0), mi(0, 0), eq).norm() < 1e-12);
        let x = upsilon_farfield(mi(2, 1), mi(1, -1), d);
        let y = upsilon_farfield(mi(1, -1), mi(2, 1), d);
        assert!((x - y.conj()).norm() < 1e-12);
    }

    #[test]
    fn psi_zero_index() {
        let v = psi_coeff(mi(0, 0), mi(0, 0), mi(0, 0));
        assert!((v.re - 44.546).abs() < 1e-3);
        assert_eq!(psi_coeff(mi(1, 1), mi(1, 0), mi(0, 0)).norm(), 0.0);
        assert_eq!(psi_coeff(mi(1, 0), mi(1, 0), mi(3, 0)).norm(), 0.0);
    }

    #[test]
    fn nearfield_monopole() {
        let d = Direction::new(0.3, 0.2).unwrap();
        let v = upsilon_nearfield(mi(0, 0), mi(0, 0), d, 1.5, 20.0).unwrap();
        assert!((v.re - 1.0 / (4.0 * PI * 1.5 * 1.5)).abs() < 1e-12);
        assert!(upsilon_nearfield(mi(0, 0), mi(0, 0), d, 0.0, 20.0).is_err());
    }

    #[test]
    fn omega_open_monopole() {
        let g = ArrayGeometry::icosahedral_32(0.042, ArrayKind::Open).unwrap();
        let p = BesselFloorPolicy::default();
        let v = omega_closed(mi(0, 0), mi(0, 0), 30.0, &g, &p).unwrap();
        assert!((v.re - 4.0 * PI).abs() < 1e-9 && v.im.abs() < 1e-12);
        assert_eq!(omega_closed(mi(1, 1), mi(1, 0), 30.0, &g, &p).unwrap().norm(), 0.0);
    }
}
