//! Modal beamforming and Wiener post-filtering.

use std::f64::consts::PI;

use ndarray::{Array2, Axis};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::array::{FrequencyGrid, ModalFrame, Stft};
use crate::error::{invalid, Error, Result};
use crate::estimator::{reverb_total_psd, PsdTrack, PsdVector, SourceSet};
use crate::sph::{bn_radial_limit, ipow, mode_count, sph_harmonics, ArrayKind, Direction, ModeIndex};

/// Modal beamformer weight family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeamformerKind {
    #[default]
    MaxDirectivity,
    DelaySum,
}

/// Weight `d_n`: `i^-n / (N+1)^2` (MD) or `4 pi |b_n(kr)|^2 / i^n` (DS).
pub fn beam_weight(kind: BeamformerKind, n: u32, kr: f64, order: u32, array: ArrayKind) -> Result<Complex64> {
    if n > order {
        return invalid(format!("mode order {n} exceeds beamformer order {order}"));
    }
    match kind {
        BeamformerKind::MaxDirectivity => Ok(ipow(-(n as i64)) / mode_count(order as usize) as f64),
        BeamformerKind::DelaySum => {
            let b = bn_radial_limit(n, kr, array)?;
            Ok(ipow(-(n as i64)) * (4.0 * PI * b.norm_sqr()))
        }
    }
}

fn steering(kind: BeamformerKind, doa: Direction, order: u32, kr: f64, array: ArrayKind) -> Result<Vec<Complex64>> {
    let y = sph_harmonics(order as usize, doa.theta, doa.phi);
    y.iter()
        .enumerate()
        .map(|(a, ya)| Ok(beam_weight(kind, ModeIndex::from_acn(a).n, kr, order, array)? * ya))
        .collect()
}

/// `sum_nm d_n alpha_nm Y_nm(doa)` for every frame and bin, `(frame, bin)`.
pub fn beamform_modal(
    frame: &ModalFrame,
    doa: Direction,
    kind: BeamformerKind,
    array: ArrayKind,
    radius: f64,
    grid: &FrequencyGrid,
) -> Result<Array2<Complex64>> {
    doa.validate()?;
    if frame.num_bins() != grid.num_bins() {
        return Err(Error::Shape(format!("frames have {} bins, grid has {}", frame.num_bins(), grid.num_bins())));
    }
    let mut out = Array2::zeros((frame.num_frames(), frame.num_bins()));
    for bin in 0..frame.num_bins() {
        let w = steering(kind, doa, frame.orders[bin], grid.wavenumber(bin) * radius, array)?;
        let alpha = frame.data.index_axis(Axis(1), bin);
        for (t, row) in alpha.outer_iter().enumerate() {
            out[[t, bin]] = w.iter().zip(row.iter()).map(|(a, b)| a * b).sum();
        }
    }
    Ok(out)
}

/// `Phi_l / (sum Phi + Phi_r + Phi_z)`, zero when the denominator vanishes.
pub fn wiener_gain(theta: &PsdVector, source: usize) -> f64 {
    let den: f64 = theta.sources.iter().sum::<f64>() + reverb_total_psd(theta) + theta.noise;
    if den > 0.0 {
        theta.sources.get(source).copied().unwrap_or(0.0) / den
    } else {
        0.0
    }
}

/// Separation settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SeparationConfig {
    pub beamformer: BeamformerKind,
    pub bypass_wiener: bool,
    /// Lower bound on the Wiener gain.
    pub gain_floor: f64,
}

impl Default for SeparationConfig {
    fn default() -> Self {
        Self { beamformer: BeamformerKind::MaxDirectivity, bypass_wiener: false, gain_floor: 0.0 }
    }
}

/// Per-source separated spectra `(frame, bin)`, gains and time signals.
#[derive(Clone, Debug)]
pub struct SeparationOutput {
    pub spectra: Vec<Array2<Complex64>>,
    pub gains: Vec<Array2<f64>>,
    pub signals: Vec<Vec<f64>>,
}

/// Beamform toward each source, apply its Wiener gain and resynthesize.
#[allow(clippy::too_many_arguments)]
pub fn separate_sources(
    frame: &ModalFrame,
    track: &PsdTrack,
    sources: &SourceSet,
    cfg: &SeparationConfig,
    array: ArrayKind,
    radius: f64,
    grid: &FrequencyGrid,
    stft: &Stft,
    signal_len: usize,
) -> Result<SeparationOutput> {
    if track.num_frames() != frame.num_frames() || track.num_bins() != frame.num_bins() {
        return Err(Error::Shape("PSD track and modal frames differ in size".into()));
    }
    if track.layout.num_sources != sources.len() {
        return Err(Error::Shape(format!(
            "PSD track has {} sources, source set has {}",
            track.layout.num_sources,
            sources.len()
        )));
    }
    let results: Vec<(Array2<Complex64>, Array2<f64>, Vec<f64>)> = sources
        .sources()
        .par_iter()
        .enumerate()
        .map(|(l, s)| {
            let mut y = beamform_modal(frame, s.direction(), cfg.beamformer, array, radius, grid)?;
            let mut g = Array2::from_elem(y.dim(), 1.0);
            if !cfg.bypass_wiener {
                for ((t, b), v) in g.indexed_iter_mut() {
                    *v = wiener_gain(&track.vector(t, b), l).max(cfg.gain_floor);
                }
                y.zip_mut_with(&g, |a, &gv| *a *= gv);
            }
            let x = stft.synthesize_channel(y.view(), signal_len)?;
            Ok((y, g, x))
        })
        .collect::<Result<_>>()?;
    let mut out = SeparationOutput { spectra: vec![], gains: vec![], signals: vec![] };
    for (y, g, x) in results {
        out.spectra.push(y);
        out.gains.push(g);
        out.signals.push(x);
    }
    Ok(out)
}
