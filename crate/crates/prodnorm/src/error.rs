use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{function}: pole at {at}")]
    Pole { function: &'static str, at: f64 },

    #[error("{function}: argument out of domain ({detail})")]
    Domain {
        function: &'static str,
        detail: String,
    },

    #[error("{what}: no convergence after {terms} terms")]
    NonConvergence { what: &'static str, terms: usize },

    #[error("{what}: quadrature did not reach tolerance (estimated relative error {rel_err:e})")]
    Quadrature { what: &'static str, rel_err: f64 },

    #[error("{0}: result overflows f64")]
    Overflow(&'static str),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unknown method '{0}'")]
    UnknownMethod(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(function: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        function,
        detail: detail.into(),
    }
}
