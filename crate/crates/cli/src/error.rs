use apoint_equidist::apoint::{CacheError, EngineError};
use apoint_equidist::conditions::ConditionError;
use apoint_equidist::counting::CountingError;
use apoint_equidist::equidist::EquidistError;
use apoint_equidist::families::FamilyError;
use apoint_equidist::oscillatory::OscError;
use apoint_equidist::quadrature::QuadError;
use apoint_equidist::target::TargetError;
use thiserror::Error;

/// Every failure the CLI reports, grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("refused: {0}")]
    Refused(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Refused(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }
}

impl From<TargetError> for CliError {
    fn from(e: TargetError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<FamilyError> for CliError {
    fn from(e: FamilyError) -> Self {
        match e {
            FamilyError::Zeta(_) => CliError::Numeric(e.to_string()),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<CacheError> for CliError {
    fn from(e: CacheError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::InvalidWindow(_) => CliError::Invalid(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<QuadError> for CliError {
    fn from(e: QuadError) -> Self {
        match e {
            QuadError::InvalidInterval(..) => CliError::Invalid(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<CountingError> for CliError {
    fn from(e: CountingError) -> Self {
        match e {
            CountingError::CacheIncomplete(e) => e.into(),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<ConditionError> for CliError {
    fn from(e: ConditionError) -> Self {
        match e {
            ConditionError::Family(e) => e.into(),
            ConditionError::QuadratureFailure(e) => e.into(),
            ConditionError::InvalidRange(_) => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<EquidistError> for CliError {
    fn from(e: EquidistError) -> Self {
        match e {
            EquidistError::NonFinite(_) => CliError::Numeric(e.to_string()),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<OscError> for CliError {
    fn from(e: OscError) -> Self {
        match e {
            OscError::QuadratureFailure(e) => e.into(),
            OscError::Family(e) => e.into(),
            OscError::CacheIncomplete(e) => e.into(),
            OscError::InvalidRange(_) | OscError::InvariantViolated(_) => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Numeric(format!("serialization failed: {e}"))
    }
}
