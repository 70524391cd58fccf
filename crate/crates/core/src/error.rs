use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or config field failed validation. `field` names it.
    #[error("invalid `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("inertia matrix is not symmetric positive definite")]
    NotPositiveDefinite,

    #[error("no feasible gains: {0}")]
    Infeasible(String),

    #[error("numerical abort at t = {t}: non-finite {component}")]
    NumericalAbort { t: f64, component: &'static str },

    #[error("config parse error: {0}")]
    ConfigParse(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
