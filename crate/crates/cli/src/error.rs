use serde::Serialize;
use thiserror::Error;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CAP: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Core(#[from] voter_core::Error),
    #[error("io failure on {path}: {message}")]
    Io { path: String, message: String },
}

impl CliError {
    pub fn io(path: impl std::fmt::Display, err: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_string(),
            message: err.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        use voter_core::Error as E;
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io { .. } => EXIT_IO,
            CliError::Core(E::CostCapExceeded(_) | E::SearchSpaceTooLarge { .. } | E::StepSizeTooCoarse { .. }) => {
                EXIT_CAP
            }
            CliError::Core(_) => EXIT_CONFIG,
        }
    }

    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        use voter_core::Error as E;
        match self {
            CliError::Config(_) => "config_invalid",
            CliError::Io { .. } => "io_failure",
            CliError::Core(e) => match e {
                E::CostCapExceeded(_) => "cost_cap_exceeded",
                E::SearchSpaceTooLarge { .. } => "search_space_too_large",
                E::StepSizeTooCoarse { .. } => "step_size_too_coarse",
                E::InvalidProbability { .. } | E::InvalidParameter(_) => "config_invalid",
                E::IrrationalInfluence { .. } => "irrational_influence",
                E::ModelMismatch(_) => "model_mismatch",
                E::ConfigMismatch(_) => "config_mismatch",
                E::DegenerateCase => "degenerate_case",
                E::NumericalBlowup(_) => "numerical_blowup",
                E::MultipleSignChanges { .. } => "multiple_sign_changes",
                E::MassLeak { .. } => "mass_leak",
                E::InvalidSwapSite { .. } => "invalid_swap_site",
                E::PhaseMismatch { .. } => "phase_mismatch",
            },
        }
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Payload<'a> {
            error: &'a str,
            message: String,
            exit_code: i32,
        }
        serde_json::to_string(&Payload {
            error: self.kind(),
            message: self.to_string(),
            exit_code: self.exit_code(),
        })
        .expect("plain struct serializes")
    }
}

pub type CliResult<T> = Result<T, CliError>;
