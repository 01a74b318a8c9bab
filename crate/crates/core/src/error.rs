use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    #[error("{func}: argument {arg} is a pole")]
    Pole { func: &'static str, arg: f64 },

    #[error("{func}: result overflows f64 (argument {arg}, threshold {threshold})")]
    Overflow {
        func: &'static str,
        arg: f64,
        threshold: f64,
    },

    #[error("{func}: result underflows f64 at argument {arg}")]
    Underflow { func: &'static str, arg: f64 },

    #[error("invalid parameter {name} = {value}: {reason}")]
    Parameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("kernel is singular at x = 0, y = 0")]
    Singularity,

    #[error("quadrature did not converge: estimate {estimate}, error bound {abs_err} after {evaluations} evaluations")]
    NonConvergence {
        estimate: f64,
        abs_err: f64,
        evaluations: usize,
    },

    #[error("stencil leaves the half-space: y = {y}, step = {h}")]
    Stencil { y: f64, h: f64 },

    #[error("invalid grid geometry: {0}")]
    Geometry(String),

    #[error("linear solver did not converge: residual {residual} after {iterations} iterations")]
    SolverNonConvergence { residual: f64, iterations: usize },

    #[error("invalid boundary data: {0}")]
    Boundary(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        func,
        detail: detail.into(),
    }
}
