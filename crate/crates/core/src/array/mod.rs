//! Array geometry, time-frequency analysis and spherical-harmonic encoding.

mod geometry;
mod modal;
mod stft;

pub use geometry::{ArrayGeometry, FrequencyGrid, Mic, SPEED_OF_SOUND};
pub use modal::{
    floored_bn, modal_coefficients, orthonormality_error, truncation_order, BesselFloorPolicy, ModalConfig,
    ModalEncoder, ModalFrame,
};
pub use stft::{Stft, StftConfig, StftSpectra};
