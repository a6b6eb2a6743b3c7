use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use modal_psd::array::StftConfig;
use modal_psd::estimator::SourceSpec;
use modal_psd::io::{read_json, read_matrix_csv, write_json};
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::config::{usage, RunConfig};

pub const MANIFEST: &str = "manifest.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunKind {
    Simulate,
    Estimate,
    Separate,
}

/// A `(frame, bin)` PSD matrix stored as CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentFile {
    pub name: String,
    pub file: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acn: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<i32>,
}

impl ComponentFile {
    pub fn plain(name: impl Into<String>, dir: &str) -> Self {
        let name = name.into();
        Self { file: format!("{dir}/{name}.csv"), name, acn: None, v: None, u: None }
    }

    pub fn gamma(acn: usize, dir: &str) -> Self {
        let v = (acn as f64).sqrt().floor() as u32;
        let u = acn as i32 - (v * v + v) as i32;
        Self { acn: Some(acn), v: Some(v), u: Some(u), ..Self::plain(format!("gamma_{acn}"), dir) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutInfo {
    pub num_sources: usize,
    pub reverb_order: Option<u32>,
    pub noise: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditioningSummary {
    /// `None` when infinite.
    pub max_condition_number: Option<f64>,
    pub median_condition_number: Option<f64>,
    pub underdetermined_bins: Vec<usize>,
    pub rank_deficient_bins: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub kind: RunKind,
    pub config: RunConfig,
    pub geometry: serde_json::Value,
    pub sample_rate: f64,
    pub stft: StftConfig,
    pub num_channels: usize,
    pub num_frames: usize,
    pub num_bins: usize,
    pub signal_len: usize,
    pub sources: Vec<SourceSpec>,
    #[serde(default)]
    pub components: Vec<ComponentFile>,
    #[serde(default)]
    pub gamma_targets: Vec<ComponentFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<LayoutInfo>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditioning: Option<ConditioningSummary>,
    /// Single-channel WAV per source, in source order.
    #[serde(default)]
    pub stems: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixture: Option<String>,
    #[serde(default)]
    pub files: Vec<String>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST);
        if !path.is_file() {
            return Err(usage(format!("manifest not found: {}", path.display())));
        }
        read_json(&path).with_context(|| format!("reading {}", path.display()))
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        write_json(&dir.join(MANIFEST), self).context("writing manifest")
    }

    /// Loads every listed PSD component, keyed by name.
    pub fn load_components(&self, dir: &Path) -> Result<BTreeMap<String, Array2<f64>>> {
        let mut out = BTreeMap::new();
        for c in &self.components {
            let path = dir.join(&c.file);
            let m = read_matrix_csv(&path).with_context(|| format!("reading {}", path.display()))?;
            if m.dim() != (self.num_frames, self.num_bins) {
                return Err(usage(format!(
                    "{}: expected {}x{} values, found {}x{}",
                    path.display(),
                    self.num_frames,
                    self.num_bins,
                    m.nrows(),
                    m.ncols()
                )));
            }
            out.insert(c.name.clone(), m);
        }
        Ok(out)
    }
}
