use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value in stage {stage} of {method}")]
    StepFailure { method: String, stage: usize },

    #[error("stepsize underflow at t = {t}: h = {h:e} is below h_min = {h_min:e}")]
    StepsizeUnderflow { t: f64, h: f64, h_min: f64 },

    #[error("maximum number of steps ({max_steps}) exceeded at t = {t}")]
    MaxStepsExceeded { max_steps: usize, t: f64 },

    #[error(
        "order not measurable: error {error:e} at the largest stepsize is at the rounding floor"
    )]
    OrderNotMeasurable { error: f64 },

    #[error("invalid tableau {name}: {reason}")]
    InvalidTableau { name: String, reason: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown tableau `{0}`")]
    UnknownTableau(String),
}

pub type Result<T> = std::result::Result<T, Error>;
