use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Extents, orders or tube lengths do not line up.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// A scalar argument is outside its legal range.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// The inverse transform produced an imaginary part that is too large to
    /// be roundoff, so the input was not the spectrum of a real tensor.
    #[error("spectrum is not conjugate symmetric: imaginary residue {residue:e} exceeds {bound:e}")]
    SymmetryViolation { residue: f64, bound: f64 },

    #[error("SVD failed to converge on frontal slice {slice}")]
    SvdFailed { slice: usize },

    #[error("format error at byte offset {offset}: {reason}")]
    Format { offset: usize, reason: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::SymmetryViolation { .. } | Error::SvdFailed { .. })
    }
}
