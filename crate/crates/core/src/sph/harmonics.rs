use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Spherical-harmonic mode `(n, m)` with `|m| <= n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeIndex {
    pub n: u32,
    pub m: i32,
}

impl ModeIndex {
    pub fn new(n: u32, m: i32) -> Result<Self> {
        if m.unsigned_abs() > n {
            return invalid(format!("mode index |m|={} exceeds n={}", m.abs(), n));
        }
        Ok(Self { n, m })
    }

    /// Ambisonic channel number `n^2 + n + m`.
    pub fn acn(self) -> usize {
        (self.n as i64 * self.n as i64 + self.n as i64 + self.m as i64) as usize
    }

    pub fn from_acn(i: usize) -> Self {
        let n = (i as f64).sqrt().floor() as u32;
        let n = if ((n + 1) * (n + 1)) as usize <= i { n + 1 } else { n };
        let m = i as i64 - (n as i64 * n as i64 + n as i64);
        Self { n, m: m as i32 }
    }
}

/// ACN position of `(n, m)`.
pub fn acn_index(idx: ModeIndex) -> usize {
    idx.acn()
}

/// Number of modes up to and including `order`.
pub fn mode_count(order: usize) -> usize {
    (order + 1) * (order + 1)
}

/// All modes up to `order` in ACN order.
pub fn modes(order: usize) -> impl Iterator<Item = ModeIndex> {
    (0..mode_count(order)).map(ModeIndex::from_acn)
}

/// A direction on the unit sphere, colatitude `theta` in `[0, pi]`, azimuth `phi` in `[0, 2pi)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub theta: f64,
    pub phi: f64,
}

impl Direction {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        let d = Self { theta, phi };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta.is_finite() && (0.0..=PI).contains(&self.theta)) {
            return invalid(format!("colatitude {} outside [0, pi]", self.theta));
        }
        if !(self.phi.is_finite() && (0.0..2.0 * PI).contains(&self.phi)) {
            return invalid(format!("azimuth {} outside [0, 2pi)", self.phi));
        }
        Ok(())
    }

    /// Direction of a Cartesian vector (need not be normalised).
    pub fn from_vector(v: [f64; 3]) -> Self {
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let theta = (v[2] / r).clamp(-1.0, 1.0).acos();
        let mut phi = v[1].atan2(v[0]);
        if phi < 0.0 {
            phi += 2.0 * PI;
        }
        if phi >= 2.0 * PI {
            phi = 0.0;
        }
        Self { theta, phi }
    }

    pub fn unit_vector(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }

    pub fn cos_angle(&self, other: &Direction) -> f64 {
        let a = self.unit_vector();
        let b = other.unit_vector();
        (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]).clamp(-1.0, 1.0)
    }
}

/// Orthonormal associated Legendre table `Pbar_n^m(cos theta)` for `0 <= m <= n <= order`,
/// stored at `n(n+1)/2 + m`, Condon-Shortley phase included.
fn legendre_table(order: usize, x: f64, s: f64) -> Vec<f64> {
    let idx = |n: usize, m: usize| n * (n + 1) / 2 + m;
    let mut p = vec![0.0; (order + 1) * (order + 2) / 2];
    p[0] = (1.0 / (4.0 * PI)).sqrt();
    for m in 1..=order {
        let f = ((2 * m + 1) as f64 / (2 * m) as f64).sqrt();
        p[idx(m, m)] = -f * s * p[idx(m - 1, m - 1)];
    }
    for m in 0..order {
        p[idx(m + 1, m)] = ((2 * m + 3) as f64).sqrt() * x * p[idx(m, m)];
    }
    for m in 0..=order {
        for n in (m + 2)..=order {
            let nf = n as f64;
            let mf = m as f64;
            let a = ((4.0 * nf * nf - 1.0) / (nf * nf - mf * mf)).sqrt();
            let b = (((nf - 1.0) * (nf - 1.0) - mf * mf) / (4.0 * (nf - 1.0) * (nf - 1.0) - 1.0)).sqrt();
            p[idx(n, m)] = a * (x * p[idx(n - 1, m)] - b * p[idx(n - 2, m)]);
        }
    }
    p
}

/// Legendre polynomials `P_0(x) .. P_order(x)`.
pub fn legendre_p(order: usize, x: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(order + 1);
    p.push(1.0);
    if order >= 1 {
        p.push(x);
    }
    for n in 2..=order {
        let nf = n as f64;
        let v = ((2.0 * nf - 1.0) * x * p[n - 1] - (nf - 1.0) * p[n - 2]) / nf;
        p.push(v);
    }
    p
}

/// All orthonormal complex harmonics up to `order` at `(theta, phi)`, ACN order.
pub fn sph_harmonics(order: usize, theta: f64, phi: f64) -> Vec<Complex64> {
    let (s, x) = theta.sin_cos();
    let p = legendre_table(order, x, s);
    let mut out = vec![Complex64::new(0.0, 0.0); mode_count(order)];
    for n in 0..=order {
        let base = n * (n + 1) / 2;
        out[n * n + n] = Complex64::new(p[base], 0.0);
        for m in 1..=n {
            let e = Complex64::from_polar(p[base + m], m as f64 * phi);
            out[n * n + n + m] = e;
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            out[n * n + n - m] = e.conj() * sign;
        }
    }
    out
}

/// Orthonormal complex spherical harmonic `Y_n^m(theta, phi)`.
pub fn sph_harmonic(idx: ModeIndex, theta: f64, phi: f64) -> Result<Complex64> {
    if idx.m.unsigned_abs() > idx.n {
        return invalid(format!("mode index |m|={} exceeds n={}", idx.m.abs(), idx.n));
    }
    if !(theta.is_finite() && (0.0..=PI).contains(&theta)) {
        return invalid(format!("colatitude {theta} outside [0, pi]"));
    }
    if !phi.is_finite() {
        return invalid("azimuth is not finite");
    }
    Ok(sph_harmonics(idx.n as usize, theta, phi)[idx.acn()])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn acn_round_trip() {
        for i in 0..200 {
            assert_eq!(ModeIndex::from_acn(i).acn(), i);
        }
        assert_eq!(ModeIndex::new(2, -1).unwrap().acn(), 5);
    }

    #[test]
    fn y10_at_pole() {
        let y = sph_harmonic(ModeIndex::new(1, 0).unwrap(), 0.0, 0.0).unwrap();
        assert!((y.re - 0.488_602_5).abs() < 1e-7 && y.im.abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_indices() {
        assert!(ModeIndex::new(1, 2).is_err());
        assert!(sph_harmonic(ModeIndex { n: 1, m: 2 }, 0.1, 0.0).is_err());
        assert!(sph_harmonic(ModeIndex { n: 1, m: 0 }, 4.0, 0.0).is_err());
    }

    #[test]
    fn direction_bounds() {
        assert!(Direction::new(0.0, 2.0 * PI).is_err());
        assert!(Direction::new(-0.1, 0.0).is_err());
        let d = Direction::from_vector([0.0, -1.0, 0.0]);
        assert!((d.phi - 1.5 * PI).abs() < 1e-12 && (d.theta - PI / 2.0).abs() < 1e-12);
    }
}
