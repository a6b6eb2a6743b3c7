//! Power spectral density estimation for spherical microphone arrays.
//!
//! Mode-domain cross-correlations of the array signals are modelled as a linear
//! combination of per-source PSDs, the spherical-harmonic coefficients of the
//! reverberant power distribution and a diffuse-noise PSD. The combination is
//! inverted per time-frequency bin by least squares. Estimates drive beamforming
//! and Wiener post-filtering for source separation.
//!
//! Spectra follow the forward DFT, so fields carry an `exp(+i omega t)` time
//! dependence: a far-field source in direction `y` contributes `exp(ik y . x)`,
//! and outgoing radiation (rigid-sphere scattering, point sources) uses spherical
//! Hankel functions of the second kind.

pub mod array;
pub mod error;
pub mod estimator;
pub mod io;
pub mod metrics;
pub mod scene;
pub mod separation;
pub mod sph;

pub use error::{Error, Result};
