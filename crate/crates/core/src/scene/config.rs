use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::estimator::SourceSpec;
use crate::sph::Direction;

fn yes() -> bool {
    true
}

fn one() -> f64 {
    1.0
}

/// Magnitude model of a source spectrum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SourceSpectrum {
    /// Constant power in every bin except DC and Nyquist.
    Flat { power: f64 },
    /// Power `power * 10^(slope * log2(f / 1 kHz) / 10)` inside `[low_hz, high_hz]`.
    Shaped {
        power: f64,
        slope_db_per_octave: f64,
        #[serde(default)]
        low_hz: Option<f64>,
        #[serde(default)]
        high_hz: Option<f64>,
    },
    /// Random on/off time-frequency blocks of constant power.
    Sparse { power: f64, block_frames: usize, block_bins: usize, activity: f64 },
    /// STFT of one channel of a WAV file.
    Wav {
        path: PathBuf,
        #[serde(default = "one")]
        gain: f64,
        #[serde(default)]
        channel: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneSource {
    pub theta: f64,
    pub phi: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range_m: Option<f64>,
    pub spectrum: SourceSpectrum,
}

impl SceneSource {
    pub fn spec(&self) -> SourceSpec {
        SourceSpec { theta: self.theta, phi: self.phi, range_m: self.range_m }
    }
}

/// Real spherical-harmonic coefficient of the reverberant power profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileTerm {
    pub v: u32,
    pub u: i32,
    pub coeff: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReverbConfig {
    #[serde(default = "yes")]
    pub enabled: bool,
    /// Direct-to-reverberant ratio applied to every source.
    pub drr_db: f64,
    /// Directional profile; empty means isotropic.
    #[serde(default)]
    pub profile: Vec<ProfileTerm>,
    /// Minimum number of plane-wave directions.
    #[serde(default)]
    pub num_plane_waves: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    #[serde(default = "yes")]
    pub enabled: bool,
    /// Noise PSD in every bin up to `band_hz`.
    pub psd: f64,
    #[serde(default)]
    pub band_hz: Option<f64>,
    #[serde(default = "default_noise_waves")]
    pub num_plane_waves: usize,
}

fn default_noise_waves() -> usize {
    256
}

/// White, spatially uncorrelated noise added at every mic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensorNoiseConfig {
    pub psd: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneConfig {
    pub sources: Vec<SceneSource>,
    #[serde(default)]
    pub reverb: Option<ReverbConfig>,
    #[serde(default)]
    pub noise: Option<NoiseConfig>,
    #[serde(default)]
    pub sensor_noise: Option<SensorNoiseConfig>,
    /// Number of STFT frames; defaults to the longest WAV source.
    #[serde(default)]
    pub frames: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

impl SceneConfig {
    pub fn validate(&self, array_radius: f64) -> Result<()> {
        if self.sources.is_empty() {
            return config("scene has no sources");
        }
        for (i, s) in self.sources.iter().enumerate() {
            if let Err(e) = Direction::new(s.theta, s.phi) {
                return config(format!("source {i}: {e}"));
            }
            if let Some(r) = s.range_m {
                if !(r > array_radius) {
                    return config(format!("source {i}: range {r} m must exceed the array radius {array_radius} m"));
                }
            }
            match &s.spectrum {
                SourceSpectrum::Flat { power } | SourceSpectrum::Shaped { power, .. } if !(*power >= 0.0) => {
                    return config(format!("source {i}: power must be non-negative"));
                }
                SourceSpectrum::Sparse { power, block_frames, block_bins, activity } => {
                    if !(*power >= 0.0) || *block_frames == 0 || *block_bins == 0 || !(0.0..=1.0).contains(activity) {
                        return config(format!("source {i}: invalid sparse spectrum"));
                    }
                }
                _ => {}
            }
        }
        if let Some(n) = &self.noise {
            if !(n.psd >= 0.0) {
                return config("noise psd must be non-negative");
            }
            if n.num_plane_waves == 0 {
                return config("noise needs at least one plane wave");
            }
        }
        if let Some(s) = &self.sensor_noise {
            if !(s.psd >= 0.0) {
                return config("sensor noise psd must be non-negative");
            }
        }
        if self.frames.is_none() && !self.sources.iter().any(|s| matches!(s.spectrum, SourceSpectrum::Wav { .. })) {
            return config("scene needs `frames` unless a source reads a WAV file");
        }
        Ok(())
    }

    /// Highest order of the reverberant profile, if reverberation is enabled.
    pub fn reverb_order(&self) -> Option<u32> {
        self.reverb.as_ref().filter(|r| r.enabled).map(|r| r.profile.iter().map(|t| t.v).max().unwrap_or(0))
    }
}
