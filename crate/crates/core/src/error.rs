use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("state is not normalized: |a1|^2 + |a2|^2 = {norm}")]
    NotNormalized { norm: f64 },

    #[error("matrix is not unitary: |U^dag U - I|_F = {defect:e}")]
    NotUnitary { defect: f64 },

    #[error("invalid system parameters: {0}")]
    InvalidParams(String),

    #[error("invalid pulse: {0}")]
    InvalidPulse(String),

    #[error("delta kick has no pointwise value")]
    NoPointwiseValue,

    #[error("degenerate pulse: {0}")]
    DegeneratePulse(String),

    #[error("propagation diverged: unitarity defect {defect:e}")]
    PropagationDiverged { defect: f64 },

    #[error("step refinement exhausted at {steps} steps (error estimate {estimate:e})")]
    RefinementExhausted { steps: usize, estimate: f64 },

    #[error("pulse does not return to initial value at t = {t}")]
    PulseNotReturned { t: f64 },

    #[error("kick not yet applied at t = {t} (t_k = {t_k}); use zero_potential_u")]
    KickNotYetApplied { t: f64, t_k: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit status for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::InvalidParams(_)
            | Error::InvalidPulse(_)
            | Error::NotNormalized { .. }
            | Error::DegeneratePulse(_) => 3,
            Error::Io(_) | Error::Csv(_) => 5,
            _ => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            3 => "config",
            5 => "io",
            _ => "propagation",
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        if e.is_io() {
            Error::Io(e.into())
        } else {
            Error::Config(e.to_string())
        }
    }
}
