use thiserror::Error;

use crate::dynamics::Trace;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Non-finite coordinate or runaway energy. The partial trace, when
    /// one was being recorded, is attached.
    #[error("integration blew up at step {step} (t = {time})")]
    Blowup {
        step: usize,
        time: f64,
        partial: Option<Box<Trace>>,
    },

    #[error("state left the validity region at t = {time}: {detail}")]
    OutsideValidityRegion { time: f64, detail: String },

    #[error("diagnostic failure: {0}")]
    Diagnostic(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
