use std::f64::consts::E;

use ndarray::{Array2, Array3, Axis};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::sph::{bn_radial, bn_radial_limit, mode_count, sph_harmonics, ModeIndex};

use super::{ArrayGeometry, FrequencyGrid, StftSpectra};

/// Lower bound applied to `|b_n|` before division.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesselFloorPolicy {
    pub enabled: bool,
    /// Orders `1..=n_min` use the constant floor.
    pub n_min: u32,
    pub b_floor: f64,
}

impl Default for BesselFloorPolicy {
    fn default() -> Self {
        Self { enabled: true, n_min: 2, b_floor: 0.05 }
    }
}

/// Order selection and floor settings of the spherical-harmonic encoder.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModalConfig {
    /// Upper bound on the truncation order, `(max_order + 1)^2 <= Q` is required.
    pub max_order: u32,
    pub floor: BesselFloorPolicy,
}

impl Default for ModalConfig {
    fn default() -> Self {
        Self { max_order: 4, floor: BesselFloorPolicy::default() }
    }
}

/// `N = max(ceil(k e r / 2), n_min)`, capped at `max_order`.
///
/// The floor for orders above `n_min` is `|b_n|` at `kr = n - 1`, the lower edge of
/// the interval where `ceil(kr) = n`.
pub fn truncation_order(k: f64, radius: f64, cfg: &ModalConfig) -> Result<u32> {
    if !(k >= 0.0) || !k.is_finite() {
        return invalid(format!("wavenumber must be non-negative, got {k}"));
    }
    let n = (k * E * radius / 2.0).ceil() as u32;
    Ok(n.max(cfg.floor.n_min).min(cfg.max_order))
}

/// `b_n(kr)` with its magnitude raised to the floor and its phase kept.
pub fn floored_bn(n: u32, k: f64, geometry: &ArrayGeometry, policy: &BesselFloorPolicy) -> Result<Complex64> {
    let b = bn_radial_limit(n, k * geometry.radius(), geometry.kind())?;
    if !policy.enabled || n == 0 {
        return Ok(b);
    }
    let floor = if n <= policy.n_min { policy.b_floor } else { bn_radial(n, (n - 1) as f64, geometry.kind())?.norm() };
    let mag = b.norm();
    if mag >= floor {
        Ok(b)
    } else if mag == 0.0 {
        Ok(Complex64::new(floor, 0.0))
    } else {
        Ok(b * (floor / mag))
    }
}

/// Largest entry of `|sum_q w_q Y*_a(q) Y_b(q) - delta_ab|` over modes up to `order`.
pub fn orthonormality_error(geometry: &ArrayGeometry, order: usize) -> f64 {
    let m = mode_count(order);
    let ys: Vec<Vec<Complex64>> = geometry.directions().iter().map(|d| sph_harmonics(order, d.theta, d.phi)).collect();
    let mut worst: f64 = 0.0;
    for a in 0..m {
        for b in 0..m {
            let s: Complex64 = ys.iter().zip(geometry.weights()).map(|(y, w)| y[a].conj() * y[b] * *w).sum();
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((s - target).norm());
        }
    }
    worst
}

/// Spherical-harmonic coefficients, `(frame, bin, mode)` in ACN order.
///
/// Bin `b` uses modes `0..(orders[b]+1)^2`; the remaining entries are zero.
#[derive(Clone, Debug)]
pub struct ModalFrame {
    pub data: Array3<Complex64>,
    pub orders: Vec<u32>,
}

impl ModalFrame {
    pub fn num_frames(&self) -> usize {
        self.data.len_of(Axis(0))
    }

    pub fn num_bins(&self) -> usize {
        self.data.len_of(Axis(1))
    }
}

/// Per-bin encoding matrices `w_q Y*_nm(q) / b~_n(kr)`.
#[derive(Clone, Debug)]
pub struct ModalEncoder {
    pub orders: Vec<u32>,
    /// Floored radial terms per bin, `b~_0..b~_N`.
    pub radial: Vec<Vec<Complex64>>,
    matrices: Vec<Array2<Complex64>>,
    max_modes: usize,
}

impl ModalEncoder {
    pub fn new(geometry: &ArrayGeometry, grid: &FrequencyGrid, cfg: &ModalConfig) -> Result<Self> {
        let q = geometry.num_mics();
        let mut orders = Vec::new();
        let mut radial = Vec::new();
        let mut matrices = Vec::new();
        for bin in 0..grid.num_bins() {
            let k = grid.wavenumber(bin);
            let n = truncation_order(k, geometry.radius(), cfg)?;
            let modes = mode_count(n as usize);
            if q < modes {
                return Err(Error::Config(format!(
                    "bin {bin} ({:.1} Hz): order {n} needs {modes} mics, array has {q}",
                    grid.frequency(bin)
                )));
            }
            let b: Vec<Complex64> = (0..=n).map(|i| floored_bn(i, k, geometry, &cfg.floor)).collect::<Result<_>>()?;
            let mut mat = Array2::zeros((modes, q));
            for (qi, (d, w)) in geometry.directions().iter().zip(geometry.weights()).enumerate() {
                let y = sph_harmonics(n as usize, d.theta, d.phi);
                for a in 0..modes {
                    let bn = b[ModeIndex::from_acn(a).n as usize];
                    if bn.norm() > 0.0 {
                        mat[[a, qi]] = y[a].conj() * *w / bn;
                    }
                }
            }
            orders.push(n);
            radial.push(b);
            matrices.push(mat);
        }
        let max_modes = orders.iter().map(|&n| mode_count(n as usize)).max().unwrap_or(1);
        Ok(Self { orders, radial, matrices, max_modes })
    }

    pub fn num_bins(&self) -> usize {
        self.orders.len()
    }

    pub fn matrix(&self, bin: usize) -> &Array2<Complex64> {
        &self.matrices[bin]
    }

    /// Encode one pressure snapshot at `bin`.
    pub fn encode(&self, bin: usize, pressure: &[Complex64]) -> Vec<Complex64> {
        let m = &self.matrices[bin];
        m.rows().into_iter().map(|row| row.iter().zip(pressure).map(|(a, p)| a * p).sum()).collect()
    }

    pub fn encode_spectra(&self, spectra: &StftSpectra) -> Result<ModalFrame> {
        if spectra.num_bins() != self.num_bins() {
            return Err(Error::Shape(format!(
                "spectra have {} bins, encoder expects {}",
                spectra.num_bins(),
                self.num_bins()
            )));
        }
        if spectra.num_channels() != self.matrices[0].ncols() {
            return Err(Error::Shape(format!(
                "spectra have {} channels, geometry has {} mics",
                spectra.num_channels(),
                self.matrices[0].ncols()
            )));
        }
        let frames = spectra.num_frames();
        let mut data = Array3::zeros((frames, self.num_bins(), self.max_modes));
        let cols: Vec<Array2<Complex64>> = (0..self.num_bins())
            .into_par_iter()
            .map(|bin| {
                let x = spectra.data.index_axis(Axis(1), bin);
                x.dot(&self.matrices[bin].t())
            })
            .collect();
        for (bin, c) in cols.into_iter().enumerate() {
            let modes = c.ncols();
            data.index_axis_mut(Axis(1), bin).slice_mut(ndarray::s![.., 0..modes]).assign(&c);
        }
        Ok(ModalFrame { data, orders: self.orders.clone() })
    }
}

/// Encode multichannel spectra into spherical-harmonic coefficients.
pub fn modal_coefficients(spectra: &StftSpectra, geometry: &ArrayGeometry, cfg: &ModalConfig) -> Result<ModalFrame> {
    let grid = spectra.grid();
    ModalEncoder::new(geometry, &grid, cfg)?.encode_spectra(spectra)
}
