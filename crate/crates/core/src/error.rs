use thiserror::Error;

/// Failure categories shared by every stage of the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid spec: {0}")]
    Spec(String),
    #[error("domain: {0}")]
    Domain(String),
    #[error("boundary point: {0}")]
    BoundaryPoint(String),
    #[error("resolution exceeded: {what} (achieved {achieved:.3e})")]
    Resolution { what: String, achieved: f64 },
    #[error("tangency: undecidable at resolution ({0})")]
    Tangency(String),
    #[error("guard: {0}")]
    Guard(String),
    #[error("builder: {0}")]
    Builder(String),
}

impl Error {
    /// Process exit code for the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) | Error::Json(_) => 2,
            Error::Spec(_) | Error::Domain(_) | Error::BoundaryPoint(_) => 3,
            Error::Resolution { .. } => 4,
            Error::Tangency(_) => 5,
            Error::Guard(_) | Error::Builder(_) => 6,
        }
    }

    pub fn category(&self) -> &'static str {
        match self {
            Error::Io(_) | Error::Json(_) => "io",
            Error::Spec(_) | Error::Domain(_) | Error::BoundaryPoint(_) => "input",
            Error::Resolution { .. } => "resolution",
            Error::Tangency(_) => "tangency",
            Error::Guard(_) | Error::Builder(_) => "guard",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
