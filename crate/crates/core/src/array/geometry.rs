use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{config, invalid, Result};
use crate::sph::{ArrayKind, Direction};

/// Speed of sound in m/s.
pub const SPEED_OF_SOUND: f64 = 343.0;

/// One microphone on the sphere with its quadrature weight.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mic {
    pub theta: f64,
    pub phi: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct GeometryFile {
    radius_m: f64,
    kind: ArrayKind,
    mics: Vec<Mic>,
}

/// Spherical array: radius, scatterer type, mic directions and weights.
#[derive(Clone, Debug, PartialEq)]
pub struct ArrayGeometry {
    radius: f64,
    kind: ArrayKind,
    directions: Vec<Direction>,
    weights: Vec<f64>,
}

impl ArrayGeometry {
    /// Mics without an explicit weight receive `4 pi / Q`.
    pub fn new(radius: f64, kind: ArrayKind, mics: &[Mic]) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return config(format!("array radius must be positive, got {radius}"));
        }
        if mics.is_empty() {
            return config("array has no microphones");
        }
        let q = mics.len() as f64;
        let mut directions = Vec::with_capacity(mics.len());
        let mut weights = Vec::with_capacity(mics.len());
        for (i, m) in mics.iter().enumerate() {
            let d = Direction { theta: m.theta, phi: m.phi.rem_euclid(2.0 * PI) };
            if d.validate().is_err() {
                return config(format!("mic {i}: direction ({}, {}) is out of range", m.theta, m.phi));
            }
            let w = m.weight.unwrap_or(4.0 * PI / q);
            if !(w > 0.0 && w.is_finite()) {
                return config(format!("mic {i}: weight must be positive, got {w}"));
            }
            directions.push(d);
            weights.push(w);
        }
        let total: f64 = weights.iter().sum();
        if (total - 4.0 * PI).abs() > 1e-3 * 4.0 * PI {
            return config(format!("mic weights sum to {total}, expected 4*pi"));
        }
        Ok(Self { radius, kind, directions, weights })
    }

    /// 32 mics at the vertices of an icosahedron (12) and its dual dodecahedron (20),
    /// with weights that integrate harmonics exactly up to order 4.
    pub fn icosahedral_32(radius: f64, kind: ArrayKind) -> Result<Self> {
        let g = (1.0 + 5f64.sqrt()) / 2.0;
        let mut pts: Vec<([f64; 3], f64)> = Vec::with_capacity(32);
        let wi = 4.0 * PI / 32.0 * 20.0 / 21.0;
        let wd = 4.0 * PI / 32.0 * 36.0 / 35.0;
        for a in [-1.0, 1.0] {
            for b in [-1.0, 1.0] {
                pts.push(([0.0, a, b * g], wi));
                pts.push(([a, b * g, 0.0], wi));
                pts.push(([b * g, 0.0, a], wi));
            }
        }
        for a in [-1.0, 1.0] {
            for b in [-1.0, 1.0] {
                for c in [-1.0, 1.0] {
                    pts.push(([a, b, c], wd));
                }
            }
        }
        for a in [-1.0, 1.0] {
            for b in [-1.0, 1.0] {
                pts.push(([a / g, 0.0, b * g], wd));
                pts.push(([0.0, b * g, a / g], wd));
                pts.push(([b * g, a / g, 0.0], wd));
            }
        }
        let mics: Vec<Mic> = pts
            .into_iter()
            .map(|(v, w)| {
                let d = Direction::from_vector(v);
                Mic { theta: d.theta, phi: d.phi, weight: Some(w) }
            })
            .collect();
        Self::new(radius, kind, &mics)
    }

    /// The bundled default: 32-mic rigid sphere of radius 4.2 cm.
    pub fn default_rigid32() -> Self {
        Self::icosahedral_32(0.042, ArrayKind::Rigid).expect("bundled geometry is valid")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let f: GeometryFile = serde_json::from_str(s)?;
        Self::new(f.radius_m, f.kind, &f.mics)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        let mics = self
            .directions
            .iter()
            .zip(&self.weights)
            .map(|(d, w)| Mic { theta: d.theta, phi: d.phi, weight: Some(*w) })
            .collect();
        let f = GeometryFile { radius_m: self.radius, kind: self.kind, mics };
        Ok(serde_json::to_string_pretty(&f)?)
    }

    /// Same mics on a different radius or scatterer type.
    pub fn with_kind(&self, kind: ArrayKind) -> Self {
        Self { kind, ..self.clone() }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn kind(&self) -> ArrayKind {
        self.kind
    }

    pub fn num_mics(&self) -> usize {
        self.directions.len()
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Mic positions in metres.
    pub fn positions(&self) -> Vec<[f64; 3]> {
        self.directions.iter().map(|d| d.unit_vector().map(|c| c * self.radius)).collect()
    }
}

/// Bin-centre frequencies and wavenumbers of a one-sided FFT grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub sample_rate: f64,
    pub fft_size: usize,
    #[serde(default = "default_c")]
    pub speed_of_sound: f64,
}

fn default_c() -> f64 {
    SPEED_OF_SOUND
}

impl FrequencyGrid {
    pub fn new(sample_rate: f64, fft_size: usize) -> Result<Self> {
        if !(sample_rate > 0.0) || fft_size < 2 {
            return invalid(format!("invalid grid: fs={sample_rate}, nfft={fft_size}"));
        }
        Ok(Self { sample_rate, fft_size, speed_of_sound: SPEED_OF_SOUND })
    }

    pub fn num_bins(&self) -> usize {
        self.fft_size / 2 + 1
    }

    pub fn frequency(&self, bin: usize) -> f64 {
        bin as f64 * self.sample_rate / self.fft_size as f64
    }

    pub fn wavenumber(&self, bin: usize) -> f64 {
        2.0 * PI * self.frequency(bin) / self.speed_of_sound
    }
}
