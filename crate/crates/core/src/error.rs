use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown potential `{0}` (expected one of mathieu, ex2, ex3, ex4, ex5)")]
    NotFound(String),

    #[error("malformed potential file: {0}")]
    Parse(String),

    /// The backward basis collapsed at the match point.
    #[error("degenerate backward basis at lambda = {lambda} (|delta| = {delta:e})")]
    DegenerateBasis { lambda: f64, delta: f64 },

    /// Mesh ladder exhausted; `best` is the last iterate and `defect` the last
    /// difference between successive iterates.
    #[error(
        "no convergence at lambda = {lambda} after reaching N = {mesh_n} \
         (last iterate {best}, successive defect {defect:e})"
    )]
    NoConvergence {
        lambda: f64,
        best: f64,
        defect: f64,
        mesh_n: usize,
    },

    /// Numerator and denominator of the density formula vanish together.
    #[error("indeterminate density at lambda = {lambda}; use the variational edge formulas")]
    Indeterminate { lambda: f64 },

    #[error("lambda = {lambda} is not strictly inside a stability interval")]
    OutOfBand { lambda: f64 },

    #[error("no sign change of the discriminant defect on [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },

    #[error("edge formulas are only available for alpha = 0 or pi/2 (got {alpha})")]
    UnsupportedBoundary { alpha: f64 },

    #[error("non-finite variational quantity at lambda = {lambda}")]
    ScalingFault { lambda: f64 },

    #[error("reference integration failed: {0}")]
    IntegrationFailure(String),
}
