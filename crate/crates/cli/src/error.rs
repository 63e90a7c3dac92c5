use thiserror::Error;

/// Exit codes: 0 success, 2 parse/validation, 3 numerical non-convergence,
/// 4 infeasible instance (unreachable input or no viable drain fraction).
#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {0}: {1}")]
    Io(String, #[source] std::io::Error),

    #[error("instance parse error: {0}")]
    Parse(#[source] serde_json::Error),

    #[error("{0}")]
    Validation(String),

    #[error(transparent)]
    Core(#[from] scf_core::Error),

    #[error("verification failed: {failed} of {total} checks")]
    VerificationFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use scf_core::Error as E;
        match self {
            CliError::Io(..) | CliError::Parse(..) | CliError::Validation(..) => 2,
            CliError::VerificationFailed { .. } => 3,
            CliError::Core(e) => match e {
                E::InvalidParameter(_)
                | E::NegativeConcentration { .. }
                | E::NotOnThresholdLocus { .. } => 2,
                E::QuadratureNonConvergence { .. }
                | E::MaxStepsExceeded { .. }
                | E::StepSizeUnderflow { .. }
                | E::InfeasiblePath
                | E::NonpositiveProfile { .. }
                | E::OptimizationFailed(_) => 3,
                E::BelowThreshold { .. }
                | E::UnreachableThreshold { .. }
                | E::InputUnreachable
                | E::NoPeriodicOrbit { .. }
                | E::NoViableFraction { .. } => 4,
            },
        }
    }
}
