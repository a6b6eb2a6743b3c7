use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use modal_psd::array::{ArrayGeometry, StftConfig};
use modal_psd::estimator::{EstimatorConfig, SourceSpec};
use modal_psd::scene::{SceneConfig, SourceSpectrum};
use modal_psd::separation::{BeamformerKind, SeparationConfig};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

/// Defaults applied under every user config.
pub const BUNDLED_PROFILE: &str = include_str!("default_config.json");

/// Bad invocation or configuration; maps to exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    /// Array layout file; `None` selects the bundled 32-mic rigid sphere.
    pub geometry: Option<PathBuf>,
    pub sample_rate: f64,
    pub stft: StftConfig,
    pub estimator: EstimatorConfig,
    pub separation: SeparationConfig,
    /// Expected number of sources; checked against `sources`.
    pub num_sources: Option<usize>,
    /// Source directions used by `estimate` and `separate`.
    pub sources: Vec<SourceSpec>,
    pub scene: Option<SceneConfig>,
    pub input: Option<PathBuf>,
    pub seed: Option<u64>,
}

fn merge(base: &mut Value, over: Value, path: &str, unknown: &mut Vec<String>) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) if !b.is_empty() => {
            for (k, v) in o {
                let sub = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v, &sub, unknown),
                    None => unknown.push(sub),
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

impl RunConfig {
    pub fn bundled() -> Self {
        serde_json::from_str(BUNDLED_PROFILE).expect("bundled profile is valid")
    }

    /// Bundled profile overlaid with `text`; relative paths resolve against `base`.
    pub fn from_json_str(text: &str, base: &Path) -> Result<Self> {
        let user: Value = serde_json::from_str(text).map_err(|e| usage(format!("config is not valid JSON: {e}")))?;
        if !user.is_object() {
            return Err(usage("config must be a JSON object"));
        }
        if let Some(v) = user.get("version") {
            if v.as_u64() != Some(SCHEMA_VERSION as u64) {
                return Err(usage(format!("unsupported config version {v}, expected {SCHEMA_VERSION}")));
            }
        }
        let mut merged: Value = serde_json::from_str(BUNDLED_PROFILE).expect("bundled profile is valid");
        let mut unknown = Vec::new();
        merge(&mut merged, user, "", &mut unknown);
        if !unknown.is_empty() {
            return Err(usage(format!("unknown config field(s): {}", unknown.join(", "))));
        }
        let mut cfg: RunConfig =
            serde_json::from_value(merged).map_err(|e| usage(format!("config schema error: {e}")))?;
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::bundled());
        };
        if !path.is_file() {
            return Err(usage(format!("config file not found: {}", path.display())));
        }
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_json_str(&text, base).with_context(|| format!("in config {}", path.display()))
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(g) = self.geometry.as_mut() {
            fix(g);
        }
        if let Some(i) = self.input.as_mut() {
            fix(i);
        }
        if let Some(scene) = self.scene.as_mut() {
            for s in &mut scene.sources {
                if let SourceSpectrum::Wav { path, .. } = &mut s.spectrum {
                    fix(path);
                }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate > 0.0 && self.sample_rate.is_finite()) {
            return Err(usage(format!("sample_rate must be positive, got {}", self.sample_rate)));
        }
        self.estimator.validate()?;
        if let Some(scene) = &self.scene {
            for (i, s) in scene.sources.iter().enumerate() {
                if let SourceSpectrum::Wav { path, .. } = &s.spectrum {
                    if !path.is_file() {
                        return Err(usage(format!("scene source {i}: WAV file not found: {}", path.display())));
                    }
                }
            }
        }
        Ok(())
    }

    /// Loads the configured geometry, or the bundled array when none is set.
    pub fn load_geometry(&self) -> Result<ArrayGeometry> {
        match &self.geometry {
            None => Ok(ArrayGeometry::default_rigid32()),
            Some(p) => {
                if !p.is_file() {
                    return Err(usage(format!("geometry file not found: {}", p.display())));
                }
                ArrayGeometry::load(p).with_context(|| format!("loading geometry {}", p.display()))
            }
        }
    }

    /// Checks `sources` against `num_sources`.
    pub fn check_source_count(&self, sources: &[SourceSpec]) -> Result<()> {
        match self.num_sources {
            Some(l) if l != sources.len() => {
                Err(usage(format!("DOA list has {} entries but num_sources is {l}", sources.len())))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum BeamformerArg {
    Md,
    Ds,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Switch {
    On,
    Off,
}

/// Command-line overrides of the run config.
#[derive(Clone, Debug, Default, clap::Args)]
pub struct Overrides {
    /// Run config (JSON, versioned schema)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Array geometry file (JSON)
    #[arg(long, global = true)]
    pub geometry: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for per-bin processing
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub beamformer: Option<BeamformerArg>,
    /// Drop the diffuse-noise column
    #[arg(long, global = true)]
    pub no_noise_column: bool,
    /// Drop the reverberant columns
    #[arg(long, global = true)]
    pub no_reverb_columns: bool,
    /// Output raw beamformer signals
    #[arg(long, global = true)]
    pub bypass_wiener: bool,
    #[arg(long, global = true, value_enum)]
    pub bessel_floor: Option<Switch>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(g) = &self.geometry {
            cfg.geometry = Some(g.clone());
        }
        if let Some(s) = self.seed {
            cfg.seed = Some(s);
        }
        if let Some(b) = self.beamformer {
            cfg.separation.beamformer = match b {
                BeamformerArg::Md => BeamformerKind::MaxDirectivity,
                BeamformerArg::Ds => BeamformerKind::DelaySum,
            };
        }
        if self.no_noise_column {
            cfg.estimator.noise_column = false;
        }
        if self.no_reverb_columns {
            cfg.estimator.reverb_columns = false;
        }
        if self.bypass_wiener {
            cfg.separation.bypass_wiener = true;
        }
        if let Some(f) = self.bessel_floor {
            cfg.estimator.modal.floor.enabled = f == Switch::On;
        }
    }

    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::load(self.config.as_deref())?;
        self.apply(&mut cfg);
        cfg.validate()?;
        Ok(cfg)
    }
}
