//! Translation matrix, correlation tracking and least-squares PSD solve.

mod coeffs;
mod config;
mod correlation;
mod pipeline;
mod solver;
mod translation;

pub use coeffs::{omega_closed, omega_quadrature, psi_coeff, upsilon_farfield, upsilon_nearfield};
pub use config::{EstimatorConfig, SourceSet, SourceSpec};
pub use correlation::CorrelationState;
pub use pipeline::{BinDiagnostics, PsdEstimator, PsdTrack};
pub use solver::{reverb_physical_psd, reverb_total_psd, solve_psd, PsdSolver, PsdVector};
pub use translation::{build_translation_matrix, max_reverb_order, ColumnLayout, ReverbOrderBounds, TranslationMatrix};
