use serde::{Deserialize, Serialize};

use crate::array::ModalConfig;
use crate::error::{config, Result};
use crate::sph::Direction;

/// Estimator settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorConfig {
    /// Order `V` of the reverberant power expansion.
    pub reverb_order: u32,
    pub reverb_columns: bool,
    pub noise_column: bool,
    /// EWMA forgetting factor.
    pub beta: f64,
    /// Bins above this frequency drop the noise column.
    pub noise_band_hz: f64,
    pub rectify: bool,
    /// Relative singular-value cutoff of the pseudo-inverse.
    pub svd_tolerance: f64,
    pub modal: ModalConfig,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            reverb_order: 0,
            reverb_columns: true,
            noise_column: true,
            beta: 0.8,
            noise_band_hz: 1000.0,
            rectify: true,
            svd_tolerance: 1e-8,
            modal: ModalConfig::default(),
        }
    }
}

impl EstimatorConfig {
    /// Free-field specialization: no reverb or noise columns.
    pub fn free_field() -> Self {
        Self { reverb_columns: false, noise_column: false, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.beta) {
            return config(format!("beta must lie in [0, 1], got {}", self.beta));
        }
        if !(self.svd_tolerance >= 0.0) {
            return config("svd_tolerance must be non-negative");
        }
        if !(self.noise_band_hz >= 0.0) {
            return config("noise_band_hz must be non-negative");
        }
        if !(self.modal.floor.b_floor > 0.0) {
            return config("b_floor must be positive");
        }
        Ok(())
    }
}

/// One source: direction of arrival and, for near-field sources, its range.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub theta: f64,
    pub phi: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range_m: Option<f64>,
}

impl SourceSpec {
    pub fn far(theta: f64, phi: f64) -> Self {
        Self { theta, phi, range_m: None }
    }

    pub fn direction(&self) -> Direction {
        Direction { theta: self.theta, phi: self.phi }
    }
}

/// Validated, non-empty list of sources with distinct directions.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceSet {
    sources: Vec<SourceSpec>,
}

impl SourceSet {
    pub fn new(sources: Vec<SourceSpec>) -> Result<Self> {
        if sources.is_empty() {
            return config("at least one source is required");
        }
        for (i, s) in sources.iter().enumerate() {
            if let Err(e) = s.direction().validate() {
                return config(format!("source {i}: {e}"));
            }
            if let Some(r) = s.range_m {
                if !(r > 0.0 && r.is_finite()) {
                    return config(format!("source {i}: range must be positive, got {r}"));
                }
            }
        }
        for i in 0..sources.len() {
            for j in 0..i {
                if sources[i].direction().cos_angle(&sources[j].direction()) > 1.0 - 1e-12 {
                    return config(format!("sources {j} and {i} share a direction"));
                }
            }
        }
        Ok(Self { sources })
    }

    pub fn far_field(directions: &[Direction]) -> Result<Self> {
        Self::new(directions.iter().map(|d| SourceSpec::far(d.theta, d.phi)).collect())
    }

    pub fn len(&self) -> usize {
        self.sources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty()
    }

    pub fn sources(&self) -> &[SourceSpec] {
        &self.sources
    }
}
