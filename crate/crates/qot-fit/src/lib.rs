//! Per-channel fit of the semi-analytic Raman profile
//!
//! ρ(z) = e^{−α z} [T − T_f e^{−α_f z} + T_b e^{−α_b L} e^{α_b z}],  T = 1 + T_f − T_b e^{−α_b L}
//!
//! to solved power profiles, and the expansion of each fit into the three
//! exponential terms consumed by the closed-form NLI model. All attenuations
//! here are power (not field) coefficients in 1/km.

mod csv_io;
mod fit;
mod model;
mod terms;

pub use fit::{fit_profile, fit_profile_with, fit_samples, ChannelFit, FitOptions, FittedCoeffs};
pub use model::model_rho;
pub use terms::{derive_terms, derive_terms_with, ChannelTerms, DerivedTerms, ExpTerm, TildeMap};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FitError {
    #[error("profile has no signal component for channel {0}")]
    MissingChannel(usize),
    #[error("channel {channel}: {reason}")]
    Degenerate { channel: usize, reason: String },
    #[error("coefficient file: {0}")]
    Format(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
