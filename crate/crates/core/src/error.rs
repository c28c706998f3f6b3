use thiserror::Error;

/// Failures reported by solvers, samplers and report writers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported dimension {0}: only 1 and 2 are implemented")]
    UnsupportedDimension(usize),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("bandwidth below grid resolution: kernel carries negative mass {negative_mass:e}")]
    BandwidthBelowResolution { negative_mass: f64 },
    #[error("density went negative ({min:e}) at t = {time}: grid or time step under-resolved")]
    NegativeDensity { min: f64, time: f64 },
    #[error(
        "solution blew up at t = {time}: sup norm {sup:e} exceeds 10x the a priori bound {bound:e}"
    )]
    Blowup { time: f64, sup: f64, bound: f64 },
    #[error("CFL violation for clock advection: ratio {ratio} > 1")]
    Cfl { ratio: f64 },
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("fixed point iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
