use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

use super::{ColumnLayout, CorrelationState, EstimatorConfig, TranslationMatrix};

/// Solved parameters for one bin and frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsdVector {
    pub sources: Vec<f64>,
    /// `Gamma_vu` in ACN order; empty without reverberant columns.
    pub gamma: Vec<f64>,
    /// Zero when the noise column is absent.
    pub noise: f64,
}

impl PsdVector {
    pub fn from_raw(raw: &[f64], layout: &ColumnLayout, rectify: bool) -> Self {
        let clamp = |v: f64| if rectify { v.max(0.0) } else { v };
        let sources = raw[..layout.num_sources].iter().map(|&v| clamp(v)).collect();
        let mut gamma: Vec<f64> = raw[layout.num_sources..layout.num_sources + layout.reverb_modes()].to_vec();
        if let Some(g0) = gamma.first_mut() {
            *g0 = clamp(*g0);
        }
        let noise = layout.noise_index().map_or(0.0, |i| clamp(raw[i]));
        Self { sources, gamma, noise }
    }

    pub fn reverb_total(&self) -> f64 {
        reverb_total_psd(self)
    }
}

/// `Phi_r = Gamma_00 / sqrt(4 pi)`, the mean reverberant power per steradian.
pub fn reverb_total_psd(theta: &PsdVector) -> f64 {
    theta.gamma.first().map_or(0.0, |g| g / (4.0 * PI).sqrt())
}

/// `sqrt(4 pi) Gamma_00`, the reverberant power received at the origin.
pub fn reverb_physical_psd(theta: &PsdVector) -> f64 {
    theta.gamma.first().map_or(0.0, |g| g * (4.0 * PI).sqrt())
}

/// Pseudo-inverse of the real-stacked system `[Re T; Im T] theta = [Re l; Im l]`.
#[derive(Clone, Debug)]
pub struct PsdSolver {
    pub layout: ColumnLayout,
    pub rank: usize,
    pub condition_number: f64,
    rows: usize,
    pinv: DMatrix<f64>,
}

impl PsdSolver {
    pub fn new(t: &TranslationMatrix, rel_tol: f64) -> Result<Self> {
        let rows = t.rows();
        let cols = t.cols();
        let mut a = DMatrix::<f64>::zeros(2 * rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                let v = t.matrix[(r, c)];
                a[(r, c)] = v.re;
                a[(rows + r, c)] = v.im;
            }
        }
        let svd = a.svd(true, true);
        let smax = svd.singular_values.max();
        let eps = rel_tol * smax;
        let rank = svd.singular_values.iter().filter(|&&s| s > eps).count();
        let smin = svd.singular_values.min();
        let condition_number = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        let pinv = svd.pseudo_inverse(eps.max(f64::MIN_POSITIVE)).map_err(|e| Error::Numerical(e.to_string()))?;
        Ok(Self { layout: t.layout, rank, condition_number, rows, pinv })
    }

    /// Unrectified least-squares solution for a vectorized correlation.
    pub fn solve_raw(&self, lambda: &[Complex64]) -> Result<Vec<f64>> {
        if lambda.len() != self.rows {
            return invalid(format!("correlation has {} entries, T has {} rows", lambda.len(), self.rows));
        }
        let mut rhs = DVector::<f64>::zeros(2 * self.rows);
        for (i, v) in lambda.iter().enumerate() {
            rhs[i] = v.re;
            rhs[self.rows + i] = v.im;
        }
        Ok((&self.pinv * rhs).iter().copied().collect())
    }

    pub fn solve(&self, state: &CorrelationState, rectify: bool) -> Result<PsdVector> {
        let raw = self.solve_raw(state.vectorized())?;
        Ok(PsdVector::from_raw(&raw, &self.layout, rectify))
    }
}

/// One-shot solve of `Lambda = T Theta`.
pub fn solve_psd(state: &CorrelationState, t: &TranslationMatrix, cfg: &EstimatorConfig) -> Result<PsdVector> {
    PsdSolver::new(t, cfg.svd_tolerance)?.solve(state, cfg.rectify)
}
