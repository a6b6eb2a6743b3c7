//! Synthetic scenes with exact ground truth.
//!
//! Sources, reverberation and noise are synthesized directly in the STFT domain.
//! Sources have fixed magnitudes and random phases, reverberation is a frozen set of
//! plane-wave directions with per-frame complex Gaussian gains, and diffuse noise is
//! a dense set of equal-power plane waves with per-frame gains.

mod config;
mod render;
mod rng;
mod synth;

pub use config::{NoiseConfig, ProfileTerm, ReverbConfig, SceneConfig, SceneSource, SensorNoiseConfig, SourceSpectrum};
pub use render::{render_scene, GroundTruth, RenderedScene};
pub use rng::{complex_gaussian, stream_rng, Stream};
pub use synth::{
    free_field_steering, plane_wave_steering, point_source_steering, synth_diffuse_noise, synth_plane_wave,
    synth_point_source, synth_reverb_field, DiffuseNoise, ReverbField,
};
