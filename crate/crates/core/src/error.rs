use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("integration blew up at step {step} (t = {time})")]
    Blowup { step: u64, time: f64 },

    #[error("sampler needs n_max >= {required} to meet the tail tolerance (got {given})")]
    InsufficientModes { required: usize, given: usize },

    #[error("Cholesky factorization failed for {points} points even with nugget; use a coarser grid")]
    Factorization { points: usize },

    #[error("empty data: {0}")]
    EmptyData(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
