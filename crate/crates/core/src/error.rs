use thiserror::Error;

pub type Result<T> = std::result::Result<T, PnsError>;

#[derive(Debug, Error)]
pub enum PnsError {
    #[error("{what} = {value} is outside {range}")]
    Domain {
        what: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("invalid design: {0}")]
    InvalidDesign(String),

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// An internal iteration hit its cap; should not happen for valid input.
    #[error("{routine} did not converge within {iterations} iterations")]
    NoConvergence {
        routine: &'static str,
        iterations: usize,
    },

    #[error("probability {0} drifted outside [0, 1] beyond rounding tolerance")]
    ProbabilityDrift(f64),

    #[error("data error{}: {message}", row.map(|r| format!(" at row {r}")).unwrap_or_default())]
    Data { row: Option<usize>, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl PnsError {
    pub(crate) fn domain(what: &'static str, value: impl Into<f64>, range: &'static str) -> Self {
        PnsError::Domain {
            what,
            value: value.into(),
            range,
        }
    }

    pub(crate) fn data(row: Option<usize>, message: impl Into<String>) -> Self {
        PnsError::Data {
            row,
            message: message.into(),
        }
    }
}
