//! PSD error, conditioning and separation scores.

use nalgebra::{DMatrix, DVector};
use ndarray::ArrayView2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Full-band normalized PSD error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsdErrorReport {
    /// `10 log10` of the mean per-bin ratio, floored at -100 dB.
    pub db: f64,
    /// Per-bin `E|Phi - Phi^| / E|Phi|` in dB; `None` for bins without active frames.
    pub per_bin_db: Vec<Option<f64>>,
}

const FLOOR_DB: f64 = -100.0;

fn to_db(x: f64) -> f64 {
    if x > 0.0 {
        (10.0 * x.log10()).max(FLOOR_DB)
    } else {
        FLOOR_DB
    }
}

/// Compare `(frame, bin)` PSDs over frames where the truth exceeds -60 dB of its peak.
pub fn psd_error(truth: ArrayView2<f64>, estimate: ArrayView2<f64>) -> Result<PsdErrorReport> {
    if truth.dim() != estimate.dim() {
        return Err(Error::InvalidArgument(format!(
            "shape mismatch: truth {:?}, estimate {:?}",
            truth.dim(),
            estimate.dim()
        )));
    }
    let peak = truth.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if peak <= 0.0 {
        return Err(Error::Domain("true PSD is identically zero".into()));
    }
    let gate = peak * 1e-6;
    let mut ratios = Vec::new();
    let mut per_bin_db = Vec::with_capacity(truth.ncols());
    for b in 0..truth.ncols() {
        let (mut num, mut den) = (0.0, 0.0);
        for t in 0..truth.nrows() {
            let p = truth[[t, b]];
            if p.abs() > gate {
                num += (p - estimate[[t, b]]).abs();
                den += p.abs();
            }
        }
        if den > 0.0 {
            ratios.push(num / den);
            per_bin_db.push(Some(to_db(num / den)));
        } else {
            per_bin_db.push(None);
        }
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    Ok(PsdErrorReport { db: to_db(mean), per_bin_db })
}

/// Largest over smallest singular value.
pub fn condition_number(m: &DMatrix<Complex64>) -> Result<f64> {
    if m.iter().all(|v| v.norm() == 0.0) {
        return Err(Error::Domain("condition number of a zero matrix".into()));
    }
    let s = m.clone().svd(false, false).singular_values;
    let smin = s.min();
    Ok(if smin > 0.0 { s.max() / smin } else { f64::INFINITY })
}

/// Energy-ratio scores of one separated source, output and mixture baseline.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationScore {
    pub sir_db: f64,
    pub snr_db: f64,
    pub sir_mixture_db: f64,
    pub snr_mixture_db: f64,
    pub sir_improvement_db: f64,
    pub snr_improvement_db: f64,
}

const CAP_DB: f64 = 100.0;

fn ratio_db(num: f64, den: f64) -> f64 {
    if den <= 0.0 {
        return CAP_DB;
    }
    if num <= 0.0 {
        return -CAP_DB;
    }
    (10.0 * (num / den).log10()).clamp(-CAP_DB, CAP_DB)
}

fn energy(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// SIR by least-squares projection onto all stems, SNR against the target stem.
fn scores(estimate: &[f64], stems: &[Vec<f64>], target: usize) -> (f64, f64) {
    let n = stems.len();
    let gram = DMatrix::from_fn(n, n, |i, j| dot(&stems[i], &stems[j]));
    let rhs = DVector::from_fn(n, |i, _| dot(&stems[i], estimate));
    let scale = gram.diagonal().max().max(f64::MIN_POSITIVE);
    let coef = gram.svd(true, true).solve(&rhs, 1e-12 * scale).unwrap_or_else(|_| DVector::zeros(n));
    let len = estimate.len();
    let target_part: Vec<f64> = stems[target].iter().map(|v| v * coef[target]).collect();
    let mut interf = vec![0.0; len];
    for (j, s) in stems.iter().enumerate() {
        if j != target {
            for (o, v) in interf.iter_mut().zip(s) {
                *o += coef[j] * v;
            }
        }
    }
    let sir = ratio_db(energy(&target_part), energy(&interf));
    let resid: Vec<f64> = estimate.iter().zip(&stems[target]).map(|(e, s)| e - s).collect();
    let snr = ratio_db(energy(&stems[target]), energy(&resid));
    (sir, snr)
}

/// Scores of `estimate` for stem `target`, relative to scoring the `mixture` itself.
pub fn sir_snr_improvement(
    estimate: &[f64],
    stems: &[Vec<f64>],
    mixture: &[f64],
    target: usize,
) -> Result<SeparationScore> {
    let len = estimate.len();
    if target >= stems.len() {
        return Err(Error::InvalidArgument(format!("target {target} out of range for {} stems", stems.len())));
    }
    if mixture.len() != len || stems.iter().any(|s| s.len() != len) {
        return Err(Error::InvalidArgument("signals must have equal lengths".into()));
    }
    if energy(&stems[target]) == 0.0 {
        return Err(Error::Domain(format!("ground-truth stem {target} is silent")));
    }
    let (sir, snr) = scores(estimate, stems, target);
    let (sir_m, snr_m) = scores(mixture, stems, target);
    Ok(SeparationScore {
        sir_db: sir,
        snr_db: snr,
        sir_mixture_db: sir_m,
        snr_mixture_db: snr_m,
        sir_improvement_db: sir - sir_m,
        snr_improvement_db: snr - snr_m,
    })
}
