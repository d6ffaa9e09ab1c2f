//! Config parsing, subcommand dispatch and artifact emission for the `qot`
//! binary. All dB and dBm conversions of the front end live here.

pub mod config;
pub mod output;
pub mod run;
pub mod suite;

pub use config::{parse_config, BackendTag, Format, Link, Loaded, RunConfig};
pub use output::{Artifact, Cell};
pub use run::{compute, run, Command, Outcome, Overrides, Report};
pub use suite::{compare_case, gap_db, random_suite, CaseComparison, SuiteCase};

use thiserror::Error;

pub const ENGINE: &str = concat!("qot ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] qot_core::CoreError),
    #[error(transparent)]
    Raman(#[from] qot_raman::RamanError),
    #[error(transparent)]
    Fit(#[from] qot_fit::FitError),
    #[error(transparent)]
    Nli(#[from] qot_nli::NliError),
    #[error(transparent)]
    Pump(#[from] qot_pump::PumpError),
    #[error(transparent)]
    Ssfm(#[from] qot_ssfm::SsfmError),
    #[error("strict mode: {0} warning(s)")]
    Strict(usize),
}

impl CliError {
    /// Stable machine-readable category.
    pub fn category(&self) -> &'static str {
        use qot_nli::NliError as N;
        use qot_ssfm::SsfmError as S;
        match self {
            CliError::Config(_) => "config",
            CliError::Io { .. } => "io",
            CliError::Core(qot_core::CoreError::Io { .. }) => "io",
            CliError::Core(_) => "input",
            CliError::Nli(N::Input(_) | N::Overlap { .. }) => "input",
            CliError::Pump(qot_pump::PumpError::Problem(_)) => "input",
            CliError::Ssfm(S::Config(_) | S::Aliasing { .. }) => "input",
            CliError::Raman(_) | CliError::Fit(_) | CliError::Nli(_) | CliError::Pump(_) | CliError::Ssfm(_) => "numerical",
            CliError::Strict(_) => "strict",
        }
    }

    /// 2 is left to argument parsing.
    pub fn exit_code(&self) -> i32 {
        match self.category() {
            "config" => 3,
            "io" => 4,
            "input" => 5,
            "numerical" => 6,
            _ => 7,
        }
    }
}
