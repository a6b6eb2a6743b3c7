use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scatterer type of a spherical array.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArrayKind {
    Open,
    Rigid,
}

fn j_series(n: u32, x: f64) -> f64 {
    // x^n / (2n+1)!! * sum_k (-x^2/2)^k / (k! (2n+3)(2n+5)...(2n+2k+1))
    let mut lead = 1.0;
    for i in 1..=n {
        lead *= x / (2 * i + 1) as f64;
    }
    let q = -0.5 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= q / (k as f64 * (2 * n + 2 * k + 1) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    lead * sum
}

/// Spherical Bessel function of the first kind `j_n(x)`.
pub fn sph_bessel_j(n: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if x < 0.0 {
        let v = sph_bessel_j(n, -x);
        return if n % 2 == 0 { v } else { -v };
    }
    if n == 0 {
        return if x < 1e-3 { j_series(0, x) } else { x.sin() / x };
    }
    if x <= n as f64 {
        return j_series(n, x);
    }
    let (s, c) = x.sin_cos();
    let mut jm = s / x;
    let mut j = s / (x * x) - c / x;
    for k in 1..n {
        let next = (2 * k + 1) as f64 / x * j - jm;
        jm = j;
        j = next;
    }
    j
}

/// `j_0(x) .. j_order(x)`.
pub fn sph_bessel_j_all(order: u32, x: f64) -> Vec<f64> {
    (0..=order).map(|n| sph_bessel_j(n, x)).collect()
}

/// Spherical Bessel function of the second kind `y_n(x)`, `x > 0`.
pub fn sph_bessel_y(n: u32, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("y_{n}({x}) requires a positive finite argument")));
    }
    let (s, c) = x.sin_cos();
    let mut ym = -c / x;
    if n == 0 {
        return Ok(ym);
    }
    let mut y = -c / (x * x) - s / x;
    for k in 1..n {
        let next = (2 * k + 1) as f64 / x * y - ym;
        ym = y;
        y = next;
    }
    Ok(y)
}

/// Derivative `j_n'(x)`.
pub fn sph_bessel_j_deriv(n: u32, x: f64) -> f64 {
    if n == 0 {
        return -sph_bessel_j(1, x);
    }
    let nf = n as f64;
    (nf * sph_bessel_j(n - 1, x) - (nf + 1.0) * sph_bessel_j(n + 1, x)) / (2.0 * nf + 1.0)
}

/// Derivative `y_n'(x)`, `x > 0`.
pub fn sph_bessel_y_deriv(n: u32, x: f64) -> Result<f64> {
    if n == 0 {
        return Ok(-sph_bessel_y(1, x)?);
    }
    let nf = n as f64;
    Ok((nf * sph_bessel_y(n - 1, x)? - (nf + 1.0) * sph_bessel_y(n + 1, x)?) / (2.0 * nf + 1.0))
}

/// Spherical Hankel function of the first kind `h_n(x) = j_n(x) + i y_n(x)`, `x > 0`.
pub fn sph_hankel1(n: u32, x: f64) -> Result<Complex64> {
    Ok(Complex64::new(sph_bessel_j(n, x), sph_bessel_y(n, x)?))
}

/// Derivative `h_n'(x)`, `x > 0`.
pub fn sph_hankel1_deriv(n: u32, x: f64) -> Result<Complex64> {
    Ok(Complex64::new(sph_bessel_j_deriv(n, x), sph_bessel_y_deriv(n, x)?))
}

/// Spherical Hankel function of the second kind `h_n^(2)(x) = j_n(x) - i y_n(x)`, `x > 0`.
///
/// Outgoing waves under the `exp(+i omega t)` time dependence of the STFT.
pub fn sph_hankel2(n: u32, x: f64) -> Result<Complex64> {
    Ok(sph_hankel1(n, x)?.conj())
}

/// Radial mode strength `b_n(kr)` of an open or rigid sphere.
///
/// Rigid: `j_n - (j_n' / h_n^(2)') h_n^(2)`, the scattered part radiating outwards for
/// spectra obtained with a forward DFT.
/// The rigid form is singular at `kr = 0`; use [`bn_radial_limit`] there.
pub fn bn_radial(n: u32, kr: f64, kind: ArrayKind) -> Result<Complex64> {
    if !(kr >= 0.0) || !kr.is_finite() {
        return Err(Error::Domain(format!("b_{n}({kr}) requires a non-negative finite argument")));
    }
    if kr == 0.0 {
        return match kind {
            ArrayKind::Open => Ok(Complex64::new(sph_bessel_j(n, 0.0), 0.0)),
            ArrayKind::Rigid => Err(Error::Domain(format!("rigid b_{n} is undefined at kr = 0"))),
        };
    }
    let j = sph_bessel_j(n, kr);
    match kind {
        ArrayKind::Open => Ok(Complex64::new(j, 0.0)),
        ArrayKind::Rigid => {
            let jd = sph_bessel_j_deriv(n, kr);
            let hd = sph_hankel1_deriv(n, kr)?.conj();
            let h = sph_hankel1(n, kr)?.conj();
            let b = Complex64::new(j, 0.0) - h * (jd / hd);
            if !b.is_finite() {
                return Err(Error::Numerical(format!("b_{n}({kr}) is not finite")));
            }
            Ok(b)
        }
    }
}

/// `b_n(kr)` with the `kr -> 0` limit (`1` for `n = 0`, `0` otherwise) for both kinds.
pub fn bn_radial_limit(n: u32, kr: f64, kind: ArrayKind) -> Result<Complex64> {
    if kr == 0.0 {
        return Ok(Complex64::new(if n == 0 { 1.0 } else { 0.0 }, 0.0));
    }
    bn_radial(n, kr, kind)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_argument_limits() {
        let x: f64 = 0.003;
        assert!((sph_bessel_j(1, x) - (x / 3.0 - x.powi(3) / 30.0)).abs() < 1e-15);
        assert!((sph_bessel_j(1, x) - 0.000_999_999_7).abs() < 1e-9);
        assert_eq!(sph_bessel_j(0, 0.0), 1.0);
        assert_eq!(sph_bessel_j(3, 0.0), 0.0);
        assert!(sph_bessel_y(0, 0.0).is_err());
        assert!(sph_hankel1(2, -1.0).is_err());
    }

    #[test]
    fn hankel_zero_at_one() {
        let h = sph_hankel1(0, 1.0).unwrap();
        assert!((h.re - 0.841_471_0).abs() < 1e-7);
        assert!((h.im + 0.540_302_3).abs() < 1e-7);
    }

    #[test]
    fn dc_limit_of_radial() {
        assert_eq!(bn_radial(0, 0.0, ArrayKind::Open).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(bn_radial(1, 0.0, ArrayKind::Open).unwrap(), Complex64::new(0.0, 0.0));
        assert!(bn_radial(0, 0.0, ArrayKind::Rigid).is_err());
        assert!(bn_radial(0, -1.0, ArrayKind::Rigid).is_err());
        for kind in [ArrayKind::Open, ArrayKind::Rigid] {
            assert_eq!(bn_radial_limit(0, 0.0, kind).unwrap(), Complex64::new(1.0, 0.0));
            assert_eq!(bn_radial_limit(2, 0.0, kind).unwrap(), Complex64::new(0.0, 0.0));
        }
    }
}
