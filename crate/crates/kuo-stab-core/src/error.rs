use thiserror::Error;

/// Errors shared across the solver stack.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("beta = {beta} is outside Ran(U'') = [{min}, {max}]")]
    BetaOutOfRange { beta: f64, min: f64, max: f64 },

    #[error("gamma function pole at {0}")]
    PoleError(f64),

    #[error("no convergence after {0} terms / grid intervals")]
    NoConvergence(usize),

    #[error("2F1(a,b;c;1) diverges: c - a - b = {0} <= 0")]
    DivergesAtOne(f64),

    #[error("gamma = {0} is outside (1/2, 1)")]
    GammaOutOfRange(f64),

    #[error("eigenfunction index n = {0} unsupported here")]
    UnsupportedIndex(usize),

    #[error("phase speed c = {0} lies inside Ran(U) and is not U_beta")]
    InvalidSpeed(f64),

    #[error("eigenfunction has {found} interior nodes, expected {expected}")]
    NodeCountMismatch { expected: usize, found: usize },

    #[error("adaptive integrator step underflow at y = {0}")]
    StepFailure(f64),

    #[error("dispersion root within {dist:.3e} of the counting contour")]
    ContourAmbiguous { dist: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
