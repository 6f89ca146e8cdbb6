use thiserror::Error;

use crate::mild::SolverReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument is malformed (dimension mismatch, empty window, ...).
    #[error("invalid argument: {0}")]
    Argument(String),

    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A problem or run configuration violates its parameter constraints.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("internal error: {0}")]
    Internal(String),

    /// Picard iteration did not contract. The report of the failed run is attached.
    #[error("picard iteration diverged{}: {} iterations, last increment {:.3e}",
        segment.map(|s| format!(" in segment {s}")).unwrap_or_default(),
        report.iterations,
        report.increments.last().copied().unwrap_or(f64::NAN))]
    Diverged {
        report: Box<SolverReport>,
        segment: Option<usize>,
    },

    /// No dyadic horizon satisfies both the invariance and the contraction bound.
    #[error("no feasible horizon: invariance bound {invariance:.4e} vs beta {beta:.4e}, contraction factor {contraction:.4e}")]
    Infeasible {
        invariance: f64,
        contraction: f64,
        beta: f64,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
