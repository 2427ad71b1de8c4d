use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("shape mismatch: expected {expected} samples, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("range error: {0}")]
    Range(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("no sign change of the fiber derivative in [{lo:e}, {hi:e}]")]
    NoFiberRoot { lo: f64, hi: f64 },
    #[error("fiber derivative has {count} sign changes around t = {t:e}")]
    FiberRootNotUnique { t: f64, count: usize },
    #[error("no sign change of the level predicate in [{lo:e}, {hi:e}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("kinetic cap saturated for {steps} consecutive steps")]
    CapSaturated { steps: usize },
    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by invalid input rather than by the numerics.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Precondition(_))
    }
}
