#![allow(dead_code)]

use std::f64::consts::PI;

use modal_psd::array::{ArrayGeometry, FrequencyGrid, ModalConfig, ModalEncoder, Stft, StftConfig};
use modal_psd::estimator::{EstimatorConfig, PsdEstimator, PsdTrack, SourceSet};
use modal_psd::scene::{render_scene, RenderedScene, SceneConfig, SceneSource, SourceSpectrum};
use modal_psd::sph::{Direction, SphereQuadrature};

pub const FS: f64 = 16000.0;

pub fn grid() -> FrequencyGrid {
    FrequencyGrid::new(FS, 128).unwrap()
}

pub fn stft() -> Stft {
    Stft::new(StftConfig::default()).unwrap()
}

/// Well-separated far-field source directions.
pub fn spread_directions(count: usize) -> Vec<Direction> {
    let q = SphereQuadrature::fibonacci(count);
    q.points
}

pub fn flat_sources(dirs: &[Direction], power: f64) -> Vec<SceneSource> {
    dirs.iter()
        .map(|d| SceneSource { theta: d.theta, phi: d.phi, range_m: None, spectrum: SourceSpectrum::Flat { power } })
        .collect()
}

pub fn scene(sources: Vec<SceneSource>, frames: usize, seed: u64) -> SceneConfig {
    SceneConfig { sources, reverb: None, noise: None, sensor_noise: None, frames: Some(frames), seed }
}

pub fn render(cfg: &SceneConfig, geometry: &ArrayGeometry) -> RenderedScene {
    render_scene(cfg, geometry, &stft(), &grid()).unwrap()
}

pub fn estimate(scene: &RenderedScene, cfg: &SceneConfig, geometry: &ArrayGeometry, est: &EstimatorConfig) -> PsdTrack {
    let grid = grid();
    let set = SourceSet::new(cfg.sources.iter().map(|s| s.spec()).collect()).unwrap();
    let modal = ModalEncoder::new(geometry, &grid, &est.modal).unwrap().encode_spectra(&scene.spectra).unwrap();
    PsdEstimator::new(geometry, &grid, &set, est).unwrap().run(&modal).unwrap()
}

pub fn modal(n_min: u32, floor: bool) -> ModalConfig {
    let mut m = ModalConfig::default();
    m.floor.n_min = n_min;
    m.floor.enabled = floor;
    m
}

pub fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn four_pi() -> f64 {
    4.0 * PI
}
