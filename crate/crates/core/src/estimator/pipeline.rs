use std::f64::consts::PI;

use ndarray::{s, Array2, Array3, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::array::{truncation_order, ArrayGeometry, FrequencyGrid, ModalFrame};
use crate::error::{config, Error, Result};
use crate::sph::mode_count;

use super::{
    build_translation_matrix, max_reverb_order, ColumnLayout, CorrelationState, EstimatorConfig, PsdSolver, PsdVector,
    SourceSet,
};

/// Conditioning report for one bin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinDiagnostics {
    pub bin: usize,
    pub frequency_hz: f64,
    pub order: u32,
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub condition_number: f64,
    pub underdetermined: bool,
    pub noise_column: bool,
    /// `V` exceeds the tighter `(N+1)^2`-based bound for this bin.
    pub exceeds_strict_bound: bool,
}

/// Estimated components over time and frequency, `(frame, bin, component)`.
///
/// Components follow `layout`; the noise entry is zero in bins without a noise column.
#[derive(Clone, Debug)]
pub struct PsdTrack {
    pub layout: ColumnLayout,
    pub data: Array3<f64>,
    pub diagnostics: Vec<BinDiagnostics>,
}

impl PsdTrack {
    pub fn num_frames(&self) -> usize {
        self.data.len_of(Axis(0))
    }

    pub fn num_bins(&self) -> usize {
        self.data.len_of(Axis(1))
    }

    pub fn source(&self, l: usize) -> Array2<f64> {
        self.data.index_axis(Axis(2), l).to_owned()
    }

    pub fn gamma(&self, i: usize) -> Option<Array2<f64>> {
        (i < self.layout.reverb_modes()).then(|| self.data.index_axis(Axis(2), self.layout.reverb_index(i)).to_owned())
    }

    /// `Gamma_00 / sqrt(4 pi)` per frame and bin; zero without reverberant columns.
    pub fn reverb_total(&self) -> Array2<f64> {
        match self.gamma(0) {
            Some(g) => g / (4.0 * PI).sqrt(),
            None => Array2::zeros((self.num_frames(), self.num_bins())),
        }
    }

    pub fn noise(&self) -> Array2<f64> {
        match self.layout.noise_index() {
            Some(i) => self.data.index_axis(Axis(2), i).to_owned(),
            None => Array2::zeros((self.num_frames(), self.num_bins())),
        }
    }

    pub fn vector(&self, frame: usize, bin: usize) -> PsdVector {
        let raw: Vec<f64> = self.data.slice(s![frame, bin, ..]).to_vec();
        PsdVector::from_raw(&raw, &self.layout, false)
    }
}

struct BinSolver {
    order: u32,
    solver: PsdSolver,
}

/// Per-bin translation matrices and pseudo-inverses for a fixed geometry and source set.
pub struct PsdEstimator {
    cfg: EstimatorConfig,
    layout: ColumnLayout,
    bins: Vec<BinSolver>,
    diagnostics: Vec<BinDiagnostics>,
}

impl PsdEstimator {
    pub fn new(
        geometry: &ArrayGeometry,
        grid: &FrequencyGrid,
        sources: &SourceSet,
        cfg: &EstimatorConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        let layout = ColumnLayout::from_config(sources.len(), cfg);
        let orders: Vec<u32> = (0..grid.num_bins())
            .map(|b| truncation_order(grid.wavenumber(b), geometry.radius(), &cfg.modal))
            .collect::<Result<_>>()?;
        let top = orders.iter().copied().max().unwrap_or(0);
        if let Some(v) = layout.reverb_order {
            let bound = max_reverb_order(top, sources.len()).map(|b| b.shape).unwrap_or(0);
            if v > bound {
                return config(format!(
                    "reverberant order V={v} exceeds the bound {bound} for N={top} and L={}",
                    sources.len()
                ));
            }
        }
        let built: Vec<(BinSolver, BinDiagnostics)> = (0..grid.num_bins())
            .into_par_iter()
            .map(|bin| {
                let k = grid.wavenumber(bin);
                let f = grid.frequency(bin);
                let mut c = *cfg;
                c.noise_column = cfg.noise_column && f <= cfg.noise_band_hz;
                let t = build_translation_matrix(&c, sources, orders[bin], k, geometry)?;
                let solver = PsdSolver::new(&t, cfg.svd_tolerance)?;
                let exceeds_strict_bound = match (layout.reverb_order, max_reverb_order(orders[bin], sources.len())) {
                    (Some(v), Ok(b)) => v > b.strict,
                    (Some(_), Err(_)) => true,
                    _ => false,
                };
                let d = BinDiagnostics {
                    bin,
                    frequency_hz: f,
                    order: orders[bin],
                    rows: t.rows(),
                    cols: t.cols(),
                    rank: solver.rank,
                    condition_number: solver.condition_number,
                    underdetermined: t.underdetermined,
                    noise_column: c.noise_column,
                    exceeds_strict_bound,
                };
                Ok((BinSolver { order: orders[bin], solver }, d))
            })
            .collect::<Result<_>>()?;
        let (bins, diagnostics) = built.into_iter().unzip();
        Ok(Self { cfg: *cfg, layout, bins, diagnostics })
    }

    pub fn layout(&self) -> ColumnLayout {
        self.layout
    }

    pub fn diagnostics(&self) -> &[BinDiagnostics] {
        &self.diagnostics
    }

    pub fn run(&self, modal: &ModalFrame) -> Result<PsdTrack> {
        self.run_inspect(modal, |_, _, _, _| {})
    }

    /// Like [`run`](Self::run), calling `inspect(bin, frame, state, estimate)` after every update.
    pub fn run_inspect<F>(&self, modal: &ModalFrame, inspect: F) -> Result<PsdTrack>
    where
        F: Fn(usize, usize, &CorrelationState, &PsdVector) + Sync,
    {
        if modal.num_bins() != self.bins.len() {
            return Err(Error::Shape(format!(
                "modal frames have {} bins, estimator has {}",
                modal.num_bins(),
                self.bins.len()
            )));
        }
        let frames = modal.num_frames();
        let width = self.layout.width();
        let per_bin: Vec<Array2<f64>> = self
            .bins
            .par_iter()
            .enumerate()
            .map(|(bin, bs)| {
                if modal.orders[bin] != bs.order {
                    return Err(Error::InvalidArgument(format!(
                        "bin {bin}: modal order {} differs from estimator order {}",
                        modal.orders[bin], bs.order
                    )));
                }
                let m = mode_count(bs.order as usize);
                let mut state = CorrelationState::new(m, self.cfg.beta)?;
                let mut out = Array2::zeros((frames, width));
                let mut alpha = vec![Default::default(); m];
                for t in 0..frames {
                    for (i, a) in alpha.iter_mut().enumerate() {
                        *a = modal.data[[t, bin, i]];
                    }
                    state.update(&alpha)?;
                    let raw = bs.solver.solve_raw(state.vectorized())?;
                    let v = PsdVector::from_raw(&raw, &bs.solver.layout, self.cfg.rectify);
                    inspect(bin, t, &state, &v);
                    let mut row = out.row_mut(t);
                    for (l, x) in v.sources.iter().enumerate() {
                        row[l] = *x;
                    }
                    for (i, g) in v.gamma.iter().enumerate() {
                        row[self.layout.reverb_index(i)] = *g;
                    }
                    if let Some(ni) = self.layout.noise_index() {
                        row[ni] = v.noise;
                    }
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        let mut data = Array3::zeros((frames, self.bins.len(), width));
        for (bin, a) in per_bin.into_iter().enumerate() {
            data.index_axis_mut(Axis(1), bin).assign(&a);
        }
        Ok(PsdTrack { layout: self.layout, data, diagnostics: self.diagnostics.clone() })
    }
}
