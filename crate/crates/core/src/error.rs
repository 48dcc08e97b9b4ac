use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// The state is (numerically) vacuum where a positive density is required.
    #[error("vacuum state where a positive density is required")]
    Vacuum,

    #[error("pair is not on a Hugoniot locus (residual {residual:e})")]
    NotOnHugoniot { residual: f64 },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("front solve failed in cell (j={j}, n={n}): {reason}")]
    Front { j: i64, n: u64, reason: String },

    #[error("cell construction failed (j={j}, n={n}): {reason}")]
    Cell { j: i64, n: u64, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Attaches cell indices to solver failures raised without them.
    pub fn in_cell(self, j: i64, n: u64) -> Self {
        match self {
            Error::Front { reason, .. } => Error::Front { j, n, reason },
            Error::Cell { reason, .. } => Error::Cell { j, n, reason },
            Error::Contract(reason) => Error::Cell { j, n, reason },
            Error::Domain(reason) => Error::Cell { j, n, reason },
            other => other,
        }
    }
}
