use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("not a separator: {0}")]
    NotSeparator(String),

    #[error("inconsistent cut: {0}")]
    InconsistentCut(String),

    #[error("mesh has no boundary nodes")]
    NoBoundary,

    #[error("non-positive spectrum (smallest eigenvalue {smallest:e})")]
    NonPositiveSpectrum { smallest: f64 },

    #[error(
        "eigenvalue iteration did not converge: size {size}, eps {eps:e}, {max_iterations} iterations"
    )]
    EigenNotConverged {
        size: usize,
        eps: f64,
        max_iterations: usize,
    },

    #[error("on-diagonal singularity: the fundamental solution is undefined at x = 0")]
    OnDiagonalSingularity,

    #[error(
        "quadrature did not converge: order {order}, estimate {estimate:e}, change under refinement {change:e}"
    )]
    QuadratureNotConverged {
        order: usize,
        estimate: f64,
        change: f64,
    },

    #[error("Λ below Λ₁: Λ = {lambda}, Λ₁ = {lambda_one}")]
    LambdaBelowLambdaOne { lambda: f64, lambda_one: f64 },

    #[error("zero surviving row mass at node {node}")]
    ZeroRowMass { node: usize },

    #[error("order cap exceeded: {legs} legs > cap {cap}")]
    OrderCapExceeded { legs: usize, cap: usize },

    #[error("overlapping boundary subsets")]
    OverlappingSubsets,

    #[error("series has non-positive constant term {0:e}")]
    NonPositiveConstantTerm(f64),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
