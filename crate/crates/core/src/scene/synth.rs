use std::f64::consts::{E, PI};

use ndarray::{Array2, Array3};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::array::{ArrayGeometry, FrequencyGrid};
use crate::error::{config, Error, Result};
use crate::sph::{
    bn_radial_limit, legendre_p, mode_count, random_rotation, sph_hankel2, sph_harmonics, ArrayKind, Direction,
    ModeIndex, SphereQuadrature,
};

use super::rng::{complex_gaussian, stream_rng, Stream};
use super::ReverbConfig;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Truncation order of the rigid-sphere modal sums.
fn sim_order(kr: f64) -> u32 {
    (E * kr).ceil() as u32 + 6
}

/// `exp(i k y . x_q)` at arbitrary positions.
pub fn free_field_steering(doa: Direction, k: f64, positions: &[[f64; 3]]) -> Vec<Complex64> {
    let u = doa.unit_vector();
    positions.iter().map(|x| Complex64::from_polar(1.0, k * (u[0] * x[0] + u[1] * x[1] + u[2] * x[2]))).collect()
}

/// Unit plane wave from `doa` at every mic, including rigid-sphere scattering.
pub fn plane_wave_steering(doa: Direction, k: f64, geometry: &ArrayGeometry) -> Result<Vec<Complex64>> {
    match geometry.kind() {
        ArrayKind::Open => Ok(free_field_steering(doa, k, &geometry.positions())),
        ArrayKind::Rigid => {
            let kr = k * geometry.radius();
            let n_sim = sim_order(kr);
            let coef: Vec<Complex64> = (0..=n_sim)
                .map(|n| {
                    Ok(crate::sph::ipow(n as i64) * (2 * n + 1) as f64 * bn_radial_limit(n, kr, ArrayKind::Rigid)?)
                })
                .collect::<Result<_>>()?;
            Ok(geometry
                .directions()
                .iter()
                .map(|d| {
                    let p = legendre_p(n_sim as usize, doa.cos_angle(d));
                    coef.iter().zip(&p).map(|(c, pn)| c * pn).sum()
                })
                .collect())
        }
    }
}

/// Point source of unit strength at `range` along `doa`: `exp(-ik|x-y|) / (4 pi |x-y|)` plus scattering.
pub fn point_source_steering(doa: Direction, range: f64, k: f64, geometry: &ArrayGeometry) -> Result<Vec<Complex64>> {
    let r = geometry.radius();
    if !(range > r) {
        return Err(Error::Domain(format!("source range {range} m must exceed the array radius {r} m")));
    }
    if k == 0.0 {
        let y = doa.unit_vector().map(|c| c * range);
        return Ok(geometry
            .positions()
            .iter()
            .map(|x| {
                let d = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2)).sqrt();
                Complex64::new(1.0 / (4.0 * PI * d), 0.0)
            })
            .collect());
    }
    let kr = k * r;
    let min_terms = sim_order(kr) as usize;
    let mut radial = Vec::new();
    let mut n = 0u32;
    loop {
        let t = -I
            * k
            * bn_radial_limit(n, kr, geometry.kind())?
            * sph_hankel2(n, k * range)?
            * ((2 * n + 1) as f64 / (4.0 * PI));
        if !t.is_finite() {
            break;
        }
        radial.push(t);
        let lead = radial[0].norm().max(1e-300);
        if (radial.len() > min_terms && t.norm() < 1e-16 * lead) || n >= 400 {
            break;
        }
        n += 1;
    }
    Ok(geometry
        .directions()
        .iter()
        .map(|d| {
            let p = legendre_p(radial.len() - 1, doa.cos_angle(d));
            radial.iter().zip(&p).map(|(c, pn)| c * pn).sum()
        })
        .collect())
}

/// Plane wave with per-bin amplitude, `(bin, mic)`.
pub fn synth_plane_wave(
    doa: Direction,
    amplitude: &[Complex64],
    geometry: &ArrayGeometry,
    grid: &FrequencyGrid,
) -> Result<Array2<Complex64>> {
    check_bins(amplitude.len(), grid)?;
    let mut out = Array2::zeros((grid.num_bins(), geometry.num_mics()));
    for (b, a) in amplitude.iter().enumerate() {
        let h = plane_wave_steering(doa, grid.wavenumber(b), geometry)?;
        for (q, v) in h.iter().enumerate() {
            out[[b, q]] = v * a;
        }
    }
    Ok(out)
}

/// Point source with per-bin strength, `(bin, mic)`.
pub fn synth_point_source(
    doa: Direction,
    range: f64,
    amplitude: &[Complex64],
    geometry: &ArrayGeometry,
    grid: &FrequencyGrid,
) -> Result<Array2<Complex64>> {
    check_bins(amplitude.len(), grid)?;
    let mut out = Array2::zeros((grid.num_bins(), geometry.num_mics()));
    for (b, a) in amplitude.iter().enumerate() {
        let h = point_source_steering(doa, range, grid.wavenumber(b), geometry)?;
        for (q, v) in h.iter().enumerate() {
            out[[b, q]] = v * a;
        }
    }
    Ok(out)
}

fn check_bins(n: usize, grid: &FrequencyGrid) -> Result<()> {
    if n != grid.num_bins() {
        return Err(Error::Shape(format!("{n} amplitudes for {} bins", grid.num_bins())));
    }
    Ok(())
}

/// Frozen reverberant plane-wave directions with per-direction expected power.
///
/// Directions form a randomly rotated Gauss-Legendre product grid; `share[r]` is the
/// quadrature weight times the normalized directional density, so the shares sum to 1
/// and integrals of the profile against harmonics up to `exact_degree` are exact.
#[derive(Clone, Debug)]
pub struct ReverbField {
    pub directions: Vec<Direction>,
    pub share: Vec<f64>,
    /// Profile order `V_true`.
    pub order: u32,
    /// Normalized profile coefficients `gamma_vu` (ACN) per unit reverberant power.
    pub gamma: Vec<f64>,
    pub exact_degree: usize,
}

/// Modal order assumed by the estimator when sizing the reverberant quadrature.
const MODEL_ORDER: usize = 4;

impl ReverbField {
    pub fn new(cfg: &ReverbConfig, seed: u64) -> Result<Self> {
        let order = cfg.profile.iter().map(|t| t.v).max().unwrap_or(0);
        let modes = mode_count(order as usize);
        let mut c = vec![0.0; modes];
        if cfg.profile.is_empty() {
            c[0] = 1.0;
        }
        for t in &cfg.profile {
            let idx = ModeIndex::new(t.v, t.u).map_err(|e| Error::Config(format!("reverb profile: {e}")))?;
            c[idx.acn()] += t.coeff;
        }
        if !(c[0] > 0.0) {
            return config("reverb profile needs a positive (0,0) coefficient");
        }
        for a in 0..modes {
            let m = ModeIndex::from_acn(a);
            let mirror = ModeIndex { n: m.n, m: -m.m }.acn();
            let sign = if m.m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            if (c[mirror] - sign * c[a]).abs() > 1e-12 * c[0] {
                return config(format!(
                    "reverb profile is not real-valued: coefficient ({}, {}) needs its (-1)^u mirror at ({}, {})",
                    m.n, m.m, m.n, -m.m
                ));
            }
        }
        let norm = c[0] * (4.0 * PI).sqrt();
        let gamma: Vec<f64> = c.iter().map(|v| v / norm).collect();
        let density = |d: &Direction| -> f64 {
            let y = sph_harmonics(order as usize, d.theta, d.phi);
            y.iter().zip(&gamma).map(|(y, g)| y.re * g).sum()
        };
        let check = SphereQuadrature::gauss_product(2 * order as usize + 24);
        if check.points.iter().any(|d| density(d) < -1e-12) {
            return config("reverb profile implies negative directional power");
        }
        let mut degree = order as usize + 2 * MODEL_ORDER;
        if let Some(r) = cfg.num_plane_waves {
            while SphereQuadrature::gauss_product(degree).len() < r {
                degree += 1;
            }
        }
        let mut rng = stream_rng(seed, Stream::ReverbLayout, &[]);
        let quad = SphereQuadrature::gauss_product(degree).rotated(&random_rotation(&mut rng));
        let share: Vec<f64> = quad.points.iter().zip(&quad.weights).map(|(d, w)| (w * density(d)).max(0.0)).collect();
        Ok(Self { directions: quad.points, share, order, gamma, exact_degree: degree })
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// Gains of one source's reverberation at one frame and bin, `E|g_r|^2 = power * share_r`.
    pub fn draw_gains(&self, seed: u64, source: usize, frame: usize, bin: usize, power: f64) -> Vec<Complex64> {
        let mut rng = stream_rng(seed, Stream::ReverbGain, &[source as u64, frame as u64, bin as u64]);
        self.share.iter().map(|s| complex_gaussian(&mut rng, power * s)).collect()
    }

    /// `sum_r |c_r|^2 Y*_vu(y_r)` for realized direction powers.
    pub fn realized_gamma(&self, powers: &[f64]) -> Vec<Complex64> {
        let mut g = vec![Complex64::new(0.0, 0.0); mode_count(self.order as usize)];
        for (d, p) in self.directions.iter().zip(powers) {
            let y = sph_harmonics(self.order as usize, d.theta, d.phi);
            for (gi, yi) in g.iter_mut().zip(&y) {
                *gi += yi.conj() * *p;
            }
        }
        g
    }

    /// Per-direction steering at wavenumber `k`, `(direction, mic)`.
    pub fn steering(&self, k: f64, geometry: &ArrayGeometry) -> Result<Vec<Vec<Complex64>>> {
        self.directions.iter().map(|d| plane_wave_steering(*d, k, geometry)).collect()
    }
}

/// Reverberant field of a unit-strength source with per-bin reverberant power.
///
/// Returns pressures `(frame, bin, mic)` and the realized `Gamma_vu` per bin, averaged over frames.
pub fn synth_reverb_field(
    field: &ReverbField,
    power: &[f64],
    seed: u64,
    frames: usize,
    geometry: &ArrayGeometry,
    grid: &FrequencyGrid,
) -> Result<(Array3<Complex64>, Array2<Complex64>)> {
    check_bins(power.len(), grid)?;
    let q = geometry.num_mics();
    let per_bin: Vec<(Array2<Complex64>, Vec<Complex64>)> = (0..grid.num_bins())
        .into_par_iter()
        .map(|b| {
            let h = field.steering(grid.wavenumber(b), geometry)?;
            let mut p = Array2::zeros((frames, q));
            let mut acc = vec![Complex64::new(0.0, 0.0); mode_count(field.order as usize)];
            for t in 0..frames {
                let g = field.draw_gains(seed, 0, t, b, power[b]);
                for (gr, hr) in g.iter().zip(&h) {
                    for (qi, hv) in hr.iter().enumerate() {
                        p[[t, qi]] += gr * hv;
                    }
                }
                let pw: Vec<f64> = g.iter().map(|v| v.norm_sqr()).collect();
                for (a, v) in acc.iter_mut().zip(field.realized_gamma(&pw)) {
                    *a += v / frames as f64;
                }
            }
            Ok((p, acc))
        })
        .collect::<Result<_>>()?;
    let mut out = Array3::zeros((frames, grid.num_bins(), q));
    let mut gamma = Array2::zeros((grid.num_bins(), mode_count(field.order as usize)));
    for (b, (p, g)) in per_bin.into_iter().enumerate() {
        out.index_axis_mut(ndarray::Axis(1), b).assign(&p);
        for (i, v) in g.into_iter().enumerate() {
            gamma[[b, i]] = v;
        }
    }
    Ok((out, gamma))
}

/// Diffuse noise as equal-power plane waves from a randomly rotated Fibonacci lattice.
///
/// Waves are evaluated as free-field plane waves at the mic positions for both array kinds,
/// so the inter-mic correlation is `Phi_z j0(k d)`.
#[derive(Clone, Debug)]
pub struct DiffuseNoise {
    pub directions: Vec<Direction>,
}

impl DiffuseNoise {
    pub fn new(num_waves: usize, seed: u64) -> Self {
        let mut rng = stream_rng(seed, Stream::NoiseLayout, &[]);
        let q = SphereQuadrature::fibonacci(num_waves).rotated(&random_rotation(&mut rng));
        Self { directions: q.points }
    }

    pub fn steering(&self, k: f64, geometry: &ArrayGeometry) -> Vec<Vec<Complex64>> {
        let pos = geometry.positions();
        self.directions.iter().map(|d| free_field_steering(*d, k, &pos)).collect()
    }

    pub fn draw_gains(&self, seed: u64, frame: usize, bin: usize, psd: f64) -> Vec<Complex64> {
        let mut rng = stream_rng(seed, Stream::NoiseGain, &[frame as u64, bin as u64]);
        let each = psd / self.directions.len() as f64;
        self.directions.iter().map(|_| complex_gaussian(&mut rng, each)).collect()
    }
}

/// Diffuse noise pressures `(frame, bin, mic)` for a per-bin PSD.
pub fn synth_diffuse_noise(
    psd: &[f64],
    num_waves: usize,
    seed: u64,
    frames: usize,
    geometry: &ArrayGeometry,
    grid: &FrequencyGrid,
) -> Result<Array3<Complex64>> {
    check_bins(psd.len(), grid)?;
    if psd.iter().any(|p| !(*p >= 0.0)) {
        return Err(Error::InvalidArgument("noise PSD must be non-negative".into()));
    }
    let noise = DiffuseNoise::new(num_waves, seed);
    let q = geometry.num_mics();
    let per_bin: Vec<Array2<Complex64>> = (0..grid.num_bins())
        .into_par_iter()
        .map(|b| {
            let h = noise.steering(grid.wavenumber(b), geometry);
            let mut p = Array2::zeros((frames, q));
            for t in 0..frames {
                let g = noise.draw_gains(seed, t, b, psd[b]);
                for (gr, hr) in g.iter().zip(&h) {
                    for (qi, hv) in hr.iter().enumerate() {
                        p[[t, qi]] += gr * hv;
                    }
                }
            }
            p
        })
        .collect();
    let mut out = Array3::zeros((frames, grid.num_bins(), q));
    for (b, p) in per_bin.into_iter().enumerate() {
        out.index_axis_mut(ndarray::Axis(1), b).assign(&p);
    }
    Ok(out)
}
