use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use num_complex::Complex64;
use proptest::prelude::*;

use modal_psd::sph::{
    acn_index, bn_radial, gaunt_w, sph_bessel_j, sph_bessel_j_deriv, sph_bessel_y, sph_hankel1, sph_hankel1_deriv,
    sph_harmonic, sph_harmonics, wigner3j, ArrayKind, ModeIndex, SphereQuadrature,
};

fn idx(n: u32, m: i32) -> ModeIndex {
    ModeIndex::new(n, m).unwrap()
}

#[test]
fn y00_is_constant() {
    for (t, p) in [(0.0, 0.0), (1.3, 4.0), (PI, 6.0)] {
        let y = sph_harmonic(idx(0, 0), t, p).unwrap();
        assert_abs_diff_eq!(y.re, 0.2820948, epsilon = 1e-7);
        assert_abs_diff_eq!(y.im, 0.0, epsilon = 1e-15);
    }
}

#[test]
fn y10_at_north_pole_matches_closed_form() {
    let y = sph_harmonic(idx(1, 0), 0.0, 0.0).unwrap();
    assert_abs_diff_eq!(y.re, (3.0 / (4.0 * PI)).sqrt(), epsilon = 1e-14);
    assert_abs_diff_eq!(y.re, 0.4886025, epsilon = 1e-7);
}

#[test]
fn y1m1_conjugation() {
    let a = sph_harmonic(idx(1, -1), 1.0, 0.5).unwrap();
    let b = -sph_harmonic(idx(1, 1), 1.0, 0.5).unwrap().conj();
    assert!((a - b).norm() < 1e-12);
}

#[test]
fn invalid_mode_is_rejected() {
    assert!(ModeIndex::new(1, 2).is_err());
    assert!(sph_harmonic(ModeIndex { n: 1, m: -3 }, 0.1, 0.1).is_err());
    assert!(sph_harmonic(idx(1, 0), 3.5, 0.1).is_err());
}

#[test]
fn bessel_examples() {
    assert_eq!(sph_bessel_j(0, 0.0), 1.0);
    assert!(sph_bessel_j(0, PI).abs() < 1e-12);
    let x: f64 = 0.003;
    let series = x / 3.0 - x.powi(3) / 30.0 + x.powi(5) / 840.0;
    assert_abs_diff_eq!(sph_bessel_j(1, x), series, epsilon = 1e-15);
    assert_abs_diff_eq!(sph_bessel_j(1, x), 0.0009999997, epsilon = 1e-9);
}

#[test]
fn bessel_matches_closed_forms_over_range() {
    for i in 1..400 {
        let x = i as f64 * 0.5;
        let (s, c) = x.sin_cos();
        let j1 = s / (x * x) - c / x;
        let j2 = (3.0 / (x * x) - 1.0) * s / x - 3.0 * c / (x * x);
        assert_abs_diff_eq!(sph_bessel_j(1, x), j1, epsilon = 1e-12);
        assert_abs_diff_eq!(sph_bessel_j(2, x), j2, epsilon = 1e-12);
        assert_abs_diff_eq!(sph_bessel_y(0, x).unwrap(), -c / x, epsilon = 1e-12);
    }
}

#[test]
fn bessel_high_order_is_stable() {
    // Series reference for n = 10 at small and moderate x.
    fn series(n: u32, x: f64) -> f64 {
        let mut df = 1.0;
        for k in 1..=n {
            df *= (2 * k + 1) as f64;
        }
        let mut term = x.powi(n as i32) / df;
        let mut sum = term;
        for k in 1..60 {
            term *= -x * x / (2.0 * k as f64 * (2 * n + 2 * k + 1) as f64);
            sum += term;
        }
        sum
    }
    for x in [0.01, 0.5, 2.0, 5.0, 9.0] {
        let want = series(10, x);
        assert!((sph_bessel_j(10, x) - want).abs() <= 1e-10 * want.abs().max(1e-300), "x = {x}");
    }
    for x in [50.0, 120.0, 200.0] {
        assert!(sph_bessel_j(10, x).abs() <= 1.0 / x + 1e-12);
        assert!(sph_bessel_j(10, x).is_finite());
    }
}

#[test]
fn hankel_examples() {
    let h = sph_hankel1(0, 1.0).unwrap();
    let direct = -Complex64::i() * Complex64::new(0.0, 1.0).exp();
    assert!((h - direct).norm() < 1e-12);
    assert_abs_diff_eq!(h.re, 0.8414710, epsilon = 1e-7);
    assert_abs_diff_eq!(h.im, -0.5403023, epsilon = 1e-7);
    assert!(sph_hankel1(0, 0.0).is_err());

    let d = 1e-6;
    let fd = (sph_bessel_j(0, 1.0 + d) - sph_bessel_j(0, 1.0 - d)) / (2.0 * d);
    assert!((sph_bessel_j_deriv(0, 1.0) - fd).abs() < 1e-6);

    let resid = sph_hankel1_deriv(1, 2.0).unwrap() - (sph_hankel1(0, 2.0).unwrap() - sph_hankel1(1, 2.0).unwrap());
    assert!(resid.norm() < 1e-12);
}

#[test]
fn radial_examples() {
    assert_eq!(bn_radial(0, 0.0, ArrayKind::Open).unwrap(), Complex64::new(1.0, 0.0));
    assert_eq!(bn_radial(1, 0.0, ArrayKind::Open).unwrap(), Complex64::new(0.0, 0.0));
    assert!(bn_radial(0, 0.0, ArrayKind::Rigid).is_err());

    // j0(pi) = 0, so b0 = -(j0'/h0') h0 with closed forms for j0', y0, y0' and h = j - i y.
    let x = PI;
    let (s, c) = x.sin_cos();
    let j0p = c / x - s / (x * x);
    let y0 = -c / x;
    let y0p = s / x + c / (x * x);
    let h0 = Complex64::new(s / x, -y0);
    let h0p = Complex64::new(j0p, -y0p);
    let want = Complex64::new(s / x, 0.0) - h0 * (j0p / h0p);
    let b0 = bn_radial(0, PI, ArrayKind::Rigid).unwrap();
    assert!((b0 - want).norm() < 1e-12);
    assert!(b0.norm() > 0.1);
}

#[test]
fn rigid_radial_has_no_zeros() {
    for n in 0..=5 {
        let mut lo = f64::INFINITY;
        for i in 1..=30000 {
            let kr = i as f64 * 1e-3;
            lo = lo.min(bn_radial(n, kr, ArrayKind::Rigid).unwrap().norm());
        }
        assert!(lo > 0.0, "n = {n}");
    }
}

fn racah(j1: i32, j2: i32, j3: i32, m1: i32, m2: i32, m3: i32) -> f64 {
    fn f(n: i32) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }
    if m1 + m2 + m3 != 0 || j3 < (j1 - j2).abs() || j3 > j1 + j2 {
        return 0.0;
    }
    let pre = (f(j1 + j2 - j3) * f(j1 - j2 + j3) * f(-j1 + j2 + j3) / f(j1 + j2 + j3 + 1)
        * f(j1 + m1)
        * f(j1 - m1)
        * f(j2 + m2)
        * f(j2 - m2)
        * f(j3 + m3)
        * f(j3 - m3))
    .sqrt();
    let mut s = 0.0;
    for k in 0..=(j1 + j2 + j3) {
        let d = [k, j3 - j2 + k + m1, j3 - j1 + k - m2, j1 + j2 - j3 - k, j1 - k - m1, j2 - k + m2];
        if d.iter().all(|&x| x >= 0) {
            s += if k % 2 == 0 { 1.0 } else { -1.0 } / d.iter().map(|&x| f(x)).product::<f64>();
        }
    }
    if (j1 - j2 - m3).rem_euclid(2) == 0 {
        pre * s
    } else {
        -pre * s
    }
}

#[test]
fn wigner_examples() {
    assert_abs_diff_eq!(wigner3j(0, 0, 0, 0, 0, 0), 1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(wigner3j(1, 1, 0, 0, 0, 0), -0.5773503, epsilon = 1e-7);
    assert_abs_diff_eq!(wigner3j(1, 1, 0, 0, 0, 0), racah(1, 1, 0, 0, 0, 0), epsilon = 1e-15);
    assert_eq!(wigner3j(1, 2, 5, 0, 0, 0), 0.0);
}

#[test]
fn wigner_accurate_up_to_order_twelve() {
    for (j1, j2, j3, m1, m2) in [(12, 12, 12, 3, -7), (12, 11, 10, -5, 2), (12, 12, 0, 4, -4), (10, 12, 8, 0, 0)] {
        let m3 = -m1 - m2;
        let want = racah(j1, j2, j3, m1, m2, m3);
        let got = wigner3j(j1, j2, j3, m1, m2, m3);
        assert!((got - want).abs() <= 1e-12 * want.abs().max(1e-12), "{j1} {j2} {j3}: {got} vs {want}");
    }
}

#[test]
fn gaunt_examples() {
    let q = SphereQuadrature::gauss_product(6);
    let triple: f64 = q.weights.iter().map(|w| w * (4.0 * PI).powf(-1.5)).sum();
    assert_abs_diff_eq!(gaunt_w(0, 0, 0, 0, 0, 0), triple, epsilon = 1e-12);
    assert_abs_diff_eq!(gaunt_w(0, 0, 0, 0, 0, 0), 0.2820948, epsilon = 1e-7);
    assert_eq!(gaunt_w(1, 1, 1, 0, 1, 0), 0.0);
    assert_eq!(gaunt_w(5, 0, 1, 0, 2, 0), 0.0);
}

#[test]
fn acn_examples() {
    assert_eq!(acn_index(idx(0, 0)), 0);
    assert_eq!(acn_index(idx(1, -1)), 1);
    assert_eq!(acn_index(idx(4, 4)), 24);
    let all: Vec<usize> =
        (0..=4u32).flat_map(|n| (-(n as i32)..=n as i32).map(move |m| acn_index(idx(n, m)))).collect();
    assert_eq!(all, (0..25).collect::<Vec<_>>());
}

#[test]
fn quadrature_orthonormality_is_reportable() {
    let q = SphereQuadrature::gauss_product(8);
    let ys: Vec<Vec<Complex64>> = q.points.iter().map(|d| sph_harmonics(4, d.theta, d.phi)).collect();
    for a in 0..25 {
        for b in 0..25 {
            let s: Complex64 = ys.iter().zip(&q.weights).map(|(y, w)| y[a] * y[b].conj() * *w).sum();
            let want = if a == b { 1.0 } else { 0.0 };
            assert!((s - want).norm() < 1e-12);
        }
    }
}

proptest! {
    #[test]
    fn conjugation_symmetry(n in 0u32..=6, mfrac in 0.0f64..1.0, theta in 0.0f64..PI, phi in 0.0f64..(2.0 * PI)) {
        let m = ((2 * n + 1) as f64 * mfrac).floor() as i32 - n as i32;
        let m = m.clamp(-(n as i32), n as i32);
        let a = sph_harmonic(idx(n, m), theta, phi).unwrap().conj();
        let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let b = sph_harmonic(idx(n, -m), theta, phi).unwrap() * sign;
        prop_assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn wigner_orthogonality(j1 in 0i32..=6, j2 in 0i32..=6, dj in 0i32..=12) {
        let j3 = (j1 - j2).abs() + dj;
        prop_assume!(j3 <= j1 + j2);
        for m3 in -j3..=j3 {
            let mut s = 0.0;
            for m1 in -j1..=j1 {
                let m2 = -m1 - m3;
                if m2.abs() <= j2 {
                    s += (2 * j3 + 1) as f64 * wigner3j(j1, j2, j3, m1, m2, m3).powi(2);
                }
            }
            prop_assert!((s - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn gaunt_azimuthal_selection(v in 0u32..=4, n in 0u32..=4, n2 in 0u32..=4, a in 0.0f64..1.0, b in 0.0f64..1.0, c in 0.0f64..1.0) {
        let pick = |deg: u32, f: f64| ((2 * deg + 1) as f64 * f).floor().min((2 * deg) as f64) as i32 - deg as i32;
        let (u, m, m2) = (pick(v, a), pick(n, b), pick(n2, c));
        if u - m + m2 != 0 || v > n + n2 {
            prop_assert_eq!(gaunt_w(v, u, n, m, n2, m2), 0.0);
        }
    }
}
