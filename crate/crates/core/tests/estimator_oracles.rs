use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use num_complex::Complex64;
use proptest::prelude::*;

use modal_psd::array::{ArrayGeometry, BesselFloorPolicy};
use modal_psd::estimator::{
    build_translation_matrix, max_reverb_order, omega_closed, omega_quadrature, psi_coeff, reverb_total_psd, solve_psd,
    upsilon_farfield, upsilon_nearfield, ColumnLayout, CorrelationState, EstimatorConfig, PsdSolver, PsdVector,
    SourceSet, SourceSpec,
};
use modal_psd::sph::{ipow, mode_count, sph_harmonics, ArrayKind, Direction, ModeIndex, SphereQuadrature};

fn idx(n: u32, m: i32) -> ModeIndex {
    ModeIndex::new(n, m).unwrap()
}

fn all_modes(order: usize) -> Vec<ModeIndex> {
    (0..mode_count(order)).map(ModeIndex::from_acn).collect()
}

fn rigid() -> ArrayGeometry {
    ArrayGeometry::default_rigid32()
}

fn antipode(d: Direction) -> Direction {
    let v = d.unit_vector();
    Direction::from_vector([-v[0], -v[1], -v[2]])
}

fn far_sources(l: usize) -> SourceSet {
    SourceSet::far_field(&SphereQuadrature::fibonacci(l).points).unwrap()
}

fn alpha_far(d: Direction, order: usize) -> Vec<Complex64> {
    sph_harmonics(order, d.theta, d.phi)
        .iter()
        .enumerate()
        .map(|(a, y)| ipow(ModeIndex::from_acn(a).n as i64) * y.conj() * (4.0 * PI))
        .collect()
}

fn mat_vec(t: &nalgebra::DMatrix<Complex64>, theta: &[f64]) -> Vec<Complex64> {
    (0..t.nrows()).map(|r| (0..t.ncols()).map(|c| t[(r, c)] * theta[c]).sum()).collect()
}

#[test]
fn upsilon_far_examples() {
    let d = Direction::new(0.7, 2.2).unwrap();
    assert_abs_diff_eq!(upsilon_farfield(idx(0, 0), idx(0, 0), d).re, 4.0 * PI, epsilon = 1e-12);
    for a in all_modes(3) {
        for b in all_modes(3) {
            let x = upsilon_farfield(a, b, d);
            let y = upsilon_farfield(b, a, d);
            assert!((x - y.conj()).norm() < 1e-12);
        }
    }
    let eq = Direction::new(PI / 2.0, 0.3).unwrap();
    assert!(upsilon_farfield(idx(1, 0), idx(0, 0), eq).norm() < 1e-14);
}

#[test]
fn upsilon_near_examples() {
    let d = Direction::new(1.2, 0.1).unwrap();
    for (r, k) in [(0.5, 10.0), (1.0, 29.3), (2.0, 3.0)] {
        let v = upsilon_nearfield(idx(0, 0), idx(0, 0), d, r, k).unwrap();
        assert_abs_diff_eq!(v.re, 1.0 / (4.0 * PI * r * r), epsilon = 1e-12);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-12);
    }
    assert!(upsilon_nearfield(idx(0, 0), idx(0, 0), d, 0.0, 10.0).is_err());
}

#[test]
fn near_field_large_range_matches_far_field() {
    let d = Direction::new(0.9, 4.0).unwrap();
    let k = 50.0;
    let r = 2.0e3;
    let scale = (4.0 * PI * r).powi(2);
    let mut opposite = 0.0f64;
    for a in all_modes(3) {
        for b in all_modes(3) {
            let near = upsilon_nearfield(a, b, d, r, k).unwrap() * scale;
            let far = upsilon_farfield(a, b, d);
            assert!((near - far).norm() < 1e-3 * (1.0 + far.norm()), "{a:?} {b:?}: {near} vs {far}");
            opposite = opposite.max((near - upsilon_farfield(a, b, antipode(d))).norm());
        }
    }
    assert!(opposite > 1.0);
}

#[test]
fn psi_examples() {
    let q = SphereQuadrature::gauss_product(6);
    let y00 = 1.0 / (4.0 * PI).sqrt();
    let triple: f64 = q.weights.iter().map(|w| w * y00 * y00 * y00).sum();
    let want = 16.0 * PI * PI * triple;
    let p = psi_coeff(idx(0, 0), idx(0, 0), idx(0, 0));
    assert_abs_diff_eq!(p.re, want, epsilon = 1e-9);
    assert_abs_diff_eq!(p.re, 44.546, epsilon = 1e-3);
    assert_eq!(psi_coeff(idx(1, 1), idx(1, 0), idx(1, 0)), Complex64::new(0.0, 0.0));
    assert_eq!(psi_coeff(idx(1, 0), idx(1, 0), idx(3, 0)), Complex64::new(0.0, 0.0));
}

#[test]
fn omega_examples() {
    let open = ArrayGeometry::icosahedral_32(0.042, ArrayKind::Open).unwrap();
    let policy = BesselFloorPolicy { enabled: false, ..Default::default() };
    for k in [3.0, 20.0, 60.0] {
        let w = omega_closed(idx(0, 0), idx(0, 0), k, &open, &policy).unwrap();
        assert_abs_diff_eq!(w.re, 4.0 * PI, epsilon = 1e-10);
        let q =
            omega_quadrature(idx(0, 0), idx(0, 0), k, &open, &policy, &SphereQuadrature::gauss_product(24)).unwrap();
        assert!((q.re - 4.0 * PI).abs() < 1e-6 * 4.0 * PI);
    }
    // k -> 0: the double sum reduces to the orthonormality sum over 1 / |b_n|^2.
    let rigid = rigid();
    let k = 1e-7;
    let quad = SphereQuadrature::gauss_product(8);
    let q = omega_quadrature(idx(0, 0), idx(0, 0), k, &rigid, &policy, &quad).unwrap();
    let b0 = modal_psd::array::floored_bn(0, k, &rigid, &policy).unwrap();
    assert_abs_diff_eq!(q.re, 4.0 * PI / b0.norm_sqr(), epsilon = 1e-8);
}

#[test]
fn translation_dimensions() {
    let g = rigid();
    let cfg = EstimatorConfig { reverb_order: 3, ..Default::default() };
    let t = build_translation_matrix(&cfg, &far_sources(4), 1, 20.0, &g).unwrap();
    assert_eq!((t.rows(), t.cols()), (16, 21));
    assert!(t.underdetermined);

    let cfg = EstimatorConfig::default();
    let t = build_translation_matrix(&cfg, &far_sources(4), 4, 20.0, &g).unwrap();
    assert_eq!((t.rows(), t.cols()), (625, 6));
    assert!(!t.underdetermined);

    let t = build_translation_matrix(&cfg, &far_sources(1), 2, 20.0, &g).unwrap();
    assert_eq!((t.rows(), t.cols()), (81, 3));
}

#[test]
fn ewma_examples() {
    let one = [Complex64::new(1.0, 0.0)];
    let mut s = CorrelationState::new(1, 0.8).unwrap();
    s.update(&one).unwrap();
    assert_abs_diff_eq!(s.get(0, 0).re, 0.2, epsilon = 1e-15);

    let mut s = CorrelationState::new(2, 0.0).unwrap();
    s.update(&[Complex64::new(1.0, 2.0), Complex64::new(-0.5, 0.3)]).unwrap();
    let before = s.vectorized().to_vec();
    let mut frozen = CorrelationState::new(2, 1.0).unwrap();
    frozen.update(&[Complex64::new(3.0, 0.0), Complex64::new(0.0, 1.0)]).unwrap();
    assert!(frozen.vectorized().iter().all(|v| v.norm() == 0.0));
    assert_eq!(s.vectorized(), &before[..]);

    let beta: f64 = 0.8;
    let alpha = [Complex64::new(0.4, -1.1), Complex64::new(2.0, 0.5), Complex64::new(-0.3, 0.0)];
    let mut s = CorrelationState::new(3, beta).unwrap();
    for tau in 1..=40 {
        s.update(&alpha).unwrap();
        let gain = 1.0 - beta.powi(tau);
        for i in 0..3 {
            for j in 0..3 {
                let want = alpha[i] * alpha[j].conj() * gain;
                assert!((s.get(i, j) - want).norm() < 1e-12);
            }
        }
    }
    assert!(s.update(&alpha[..2]).is_err());
}

#[test]
fn single_source_analytic_solve_is_exact() {
    let g = rigid();
    let d = Direction::new(1.0, 0.4).unwrap();
    let set = SourceSet::far_field(&[d]).unwrap();
    let cfg = EstimatorConfig::default();
    for order in [2u32, 3, 4] {
        let t = build_translation_matrix(&cfg, &set, order, 25.0, &g).unwrap();
        let mut s = CorrelationState::new(mode_count(order as usize), 0.0).unwrap();
        s.update(&alpha_far(d, order as usize)).unwrap();
        let theta = solve_psd(&s, &t, &cfg).unwrap();
        assert_abs_diff_eq!(theta.sources[0], 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(theta.gamma[0], 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(theta.noise, 0.0, epsilon = 1e-6);
    }
}

#[test]
fn pure_noise_analytic_solve() {
    let g = rigid();
    let cfg = EstimatorConfig::default();
    let set = far_sources(2);
    let t = build_translation_matrix(&cfg, &set, 4, 30.0, &g).unwrap();
    let sigma2 = 2.5;
    let noise = t.layout.noise_index().unwrap();
    let lambda: Vec<Complex64> = (0..t.rows()).map(|r| t.matrix[(r, noise)] * sigma2).collect();
    let raw = PsdSolver::new(&t, cfg.svd_tolerance).unwrap().solve_raw(&lambda).unwrap();
    let theta = PsdVector::from_raw(&raw, &t.layout, true);
    assert_abs_diff_eq!(theta.noise, sigma2, epsilon = 1e-6);
    for s in &theta.sources {
        assert!(s.abs() < 1e-6);
    }
}

#[test]
fn rectification_clamps_negative_entries() {
    let layout = ColumnLayout { num_sources: 2, reverb_order: Some(1), noise: true };
    let raw = [-0.3, 0.7, -0.2, 0.1, -0.4, 0.05, -0.1];
    let v = PsdVector::from_raw(&raw, &layout, true);
    assert_eq!(v.sources, vec![0.0, 0.7]);
    assert_eq!(v.gamma[0], 0.0);
    assert_eq!(v.gamma[2], -0.4);
    assert_eq!(v.noise, 0.0);
    let v = PsdVector::from_raw(&raw, &layout, false);
    assert_eq!(v.sources[0], -0.3);
}

#[test]
fn reverb_total_examples() {
    let v = |g: f64| PsdVector { sources: vec![], gamma: vec![g], noise: 0.0 };
    assert_abs_diff_eq!(reverb_total_psd(&v(1.0)), 0.2820948, epsilon = 1e-7);
    assert_eq!(reverb_total_psd(&v(0.0)), 0.0);
    assert_abs_diff_eq!(reverb_total_psd(&v(2.0)), 2.0 * reverb_total_psd(&v(1.0)), epsilon = 1e-15);
}

#[test]
fn reverb_order_bounds() {
    let b = max_reverb_order(4, 4).unwrap();
    assert_eq!((b.strict, b.shape), (3, 23));
    assert!(max_reverb_order(1, 4).is_err());
}

#[test]
fn dropping_reverb_and_noise_columns_keeps_free_field_solution() {
    let g = rigid();
    let set = far_sources(4);
    let powers = [1.0, 0.3, 2.2, 0.7];
    let full = EstimatorConfig::default();
    let free = EstimatorConfig::free_field();
    let k = 30.0;
    let t_free = build_translation_matrix(&free, &set, 4, k, &g).unwrap();
    let lambda = mat_vec(&t_free.matrix, &powers);
    let solve = |cfg: &EstimatorConfig| {
        let t = build_translation_matrix(cfg, &set, 4, k, &g).unwrap();
        let raw = PsdSolver::new(&t, cfg.svd_tolerance).unwrap().solve_raw(&lambda).unwrap();
        PsdVector::from_raw(&raw, &t.layout, false)
    };
    let (a, b) = (solve(&full), solve(&free));
    for l in 0..4 {
        assert!((a.sources[l] - b.sources[l]).abs() < 1e-6);
        assert!((b.sources[l] - powers[l]).abs() < 1e-6);
    }
    assert!(a.gamma[0].abs() < 1e-6 && a.noise.abs() < 1e-6);
}

#[test]
fn far_field_columns_do_not_depend_on_frequency() {
    let g = rigid();
    let cfg = EstimatorConfig { reverb_order: 1, ..Default::default() };
    let set = far_sources(3);
    let a = build_translation_matrix(&cfg, &set, 3, 7.0, &g).unwrap();
    let b = build_translation_matrix(&cfg, &set, 3, 95.0, &g).unwrap();
    let noise = a.layout.noise_index().unwrap();
    let mut diff = 0.0f64;
    let mut noise_diff = 0.0f64;
    for r in 0..a.rows() {
        for c in 0..a.cols() {
            let d = (a.matrix[(r, c)] - b.matrix[(r, c)]).norm();
            if c == noise {
                noise_diff = noise_diff.max(d);
            } else {
                diff = diff.max(d);
            }
        }
    }
    assert_eq!(diff, 0.0);
    assert!(noise_diff > 0.0);
}

#[test]
fn near_field_source_solve_is_exact() {
    let g = rigid();
    let cfg = EstimatorConfig::free_field();
    let set = SourceSet::new(vec![
        SourceSpec { theta: 0.8, phi: 1.0, range_m: Some(0.5) },
        SourceSpec { theta: 2.1, phi: 4.0, range_m: None },
    ])
    .unwrap();
    let t = build_translation_matrix(&cfg, &set, 3, 40.0, &g).unwrap();
    let lambda = mat_vec(&t.matrix, &[0.6, 1.4]);
    let raw = PsdSolver::new(&t, cfg.svd_tolerance).unwrap().solve_raw(&lambda).unwrap();
    assert_abs_diff_eq!(raw[0], 0.6, epsilon = 1e-6);
    assert_abs_diff_eq!(raw[1], 1.4, epsilon = 1e-6);
}

proptest! {
    #[test]
    fn correlation_stays_hermitian(seed in 0u64..10_000, beta in 0.0f64..1.0, frames in 1usize..30) {
        let dim = 9;
        let mut s = CorrelationState::new(dim, beta).unwrap();
        for t in 0..frames {
            let alpha: Vec<Complex64> = (0..dim)
                .map(|i| {
                    let u = ((seed + 13 * t as u64 + 7 * i as u64) as f64 * 0.7548776).fract() - 0.5;
                    let v = ((seed * 3 + 5 * t as u64 + 11 * i as u64) as f64 * 0.5698402).fract() - 0.5;
                    Complex64::new(u, v) * 10.0
                })
                .collect();
            s.update(&alpha).unwrap();
            prop_assert!(s.is_valid());
            for i in 0..dim {
                prop_assert!(s.get(i, i).im == 0.0 && s.get(i, i).re >= 0.0);
                for j in 0..dim {
                    prop_assert_eq!(s.get(i, j), s.get(j, i).conj());
                }
            }
        }
    }

    #[test]
    fn single_source_solve_exact_for_any_direction(theta in 0.0f64..PI, phi in 0.0f64..(2.0 * PI), p in 0.01f64..100.0) {
        let g = rigid();
        let d = Direction::new(theta, phi).unwrap();
        let set = SourceSet::far_field(&[d]).unwrap();
        let cfg = EstimatorConfig::default();
        let t = build_translation_matrix(&cfg, &set, 3, 37.0, &g).unwrap();
        let a: Vec<Complex64> = alpha_far(d, 3).iter().map(|v| v * p.sqrt()).collect();
        let mut s = CorrelationState::new(16, 0.0).unwrap();
        s.update(&a).unwrap();
        let theta_hat = solve_psd(&s, &t, &cfg).unwrap();
        prop_assert!((theta_hat.sources[0] - p).abs() < 1e-6 * p.max(1.0));
    }
}
