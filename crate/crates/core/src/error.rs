use thiserror::Error;

/// Errors raised by the analysis library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter lies outside the set where the quantity is defined.
    #[error("{what} = {value} is outside {domain}")]
    Domain {
        what: &'static str,
        value: String,
        domain: String,
    },

    /// A cylinder radius is too small to be trusted on the sampling grid.
    #[error("radius {radius} is below the resolution floor {floor} ({min_cells} cells of width {h})")]
    Resolution {
        radius: f64,
        floor: f64,
        min_cells: u32,
        h: f64,
    },

    /// Evaluation region or stencil falls outside the sampled data.
    #[error("range error: {0}")]
    Range(String),

    /// Invalid configuration or construction parameters.
    #[error("configuration error: {0}")]
    Config(String),

    /// Operation needs data the field does not carry.
    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// Caller violated an operation's precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Iterative solver stopped before reaching its tolerance.
    #[error("solver did not converge: relative residual {residual:e} after {iterations} iterations")]
    Solver { residual: f64, iterations: usize },
}

impl Error {
    pub(crate) fn domain(what: &'static str, value: impl ToString, domain: impl Into<String>) -> Self {
        Error::Domain {
            what,
            value: value.to_string(),
            domain: domain.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
