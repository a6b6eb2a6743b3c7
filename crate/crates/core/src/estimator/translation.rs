use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::array::{ArrayGeometry, ModalConfig};
use crate::error::{Error, Result};
use crate::sph::{mode_count, ModeIndex};

use super::coeffs::{omega_closed, psi_coeff, upsilon_farfield, upsilon_nearfield};
use super::{EstimatorConfig, SourceSet};

/// Column arrangement of `T` and of the solved parameter vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnLayout {
    pub num_sources: usize,
    /// `Some(V)` when reverberant columns are present.
    pub reverb_order: Option<u32>,
    pub noise: bool,
}

impl ColumnLayout {
    pub fn from_config(num_sources: usize, cfg: &EstimatorConfig) -> Self {
        Self { num_sources, reverb_order: cfg.reverb_columns.then_some(cfg.reverb_order), noise: cfg.noise_column }
    }

    pub fn reverb_modes(&self) -> usize {
        self.reverb_order.map_or(0, |v| mode_count(v as usize))
    }

    pub fn width(&self) -> usize {
        self.num_sources + self.reverb_modes() + usize::from(self.noise)
    }

    pub fn reverb_index(&self, i: usize) -> usize {
        self.num_sources + i
    }

    pub fn noise_index(&self) -> Option<usize> {
        self.noise.then(|| self.num_sources + self.reverb_modes())
    }
}

/// Upper bounds on the reverberant order `V`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReverbOrderBounds {
    /// `floor(sqrt((N+1)^2 - L - 1) - 1)`.
    pub strict: u32,
    /// `floor(sqrt((N+1)^4 - L - 1) - 1)`, from the row count of `T`.
    pub shape: u32,
}

/// Both bounds on `V` for order `N` and `L` sources.
pub fn max_reverb_order(order: u32, num_sources: usize) -> Result<ReverbOrderBounds> {
    let m = mode_count(order as usize);
    if m <= num_sources + 1 {
        return Err(Error::Domain(format!(
            "(N+1)^2 = {m} must exceed L + 1 = {} for a reverberant order bound",
            num_sources + 1
        )));
    }
    let bound = |rows: usize| ((rows - num_sources - 1) as f64).sqrt().floor() as u32 - 1;
    Ok(ReverbOrderBounds { strict: bound(m), shape: bound(m * m) })
}

/// `T` for one frequency bin: rows `(nm, n'm')` in row-major ACN order.
#[derive(Clone, Debug)]
pub struct TranslationMatrix {
    pub order: u32,
    pub k: f64,
    pub layout: ColumnLayout,
    pub matrix: DMatrix<Complex64>,
    /// Fewer rows than columns; solved by minimum norm.
    pub underdetermined: bool,
}

impl TranslationMatrix {
    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }
}

/// Assemble `T` from direct-path, reverberant and noise columns.
pub fn build_translation_matrix(
    cfg: &EstimatorConfig,
    sources: &SourceSet,
    order: u32,
    k: f64,
    geometry: &ArrayGeometry,
) -> Result<TranslationMatrix> {
    let layout = ColumnLayout::from_config(sources.len(), cfg);
    let m = mode_count(order as usize);
    let rows = m * m;
    let mut t = DMatrix::<Complex64>::zeros(rows, layout.width());
    let modes: Vec<ModeIndex> = (0..m).map(ModeIndex::from_acn).collect();
    let modal: &ModalConfig = &cfg.modal;
    for (ai, a) in modes.iter().enumerate() {
        for (bi, b) in modes.iter().enumerate() {
            let row = ai * m + bi;
            for (l, s) in sources.sources().iter().enumerate() {
                t[(row, l)] = match s.range_m {
                    None => upsilon_farfield(*a, *b, s.direction()),
                    Some(r) => upsilon_nearfield(*a, *b, s.direction(), r, k)?,
                };
            }
            for i in 0..layout.reverb_modes() {
                t[(row, layout.reverb_index(i))] = psi_coeff(*a, *b, ModeIndex::from_acn(i));
            }
            if let Some(c) = layout.noise_index() {
                t[(row, c)] = omega_closed(*a, *b, k, geometry, &modal.floor)?;
            }
        }
    }
    Ok(TranslationMatrix { order, k, layout, underdetermined: rows < layout.width(), matrix: t })
}
