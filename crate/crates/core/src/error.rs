use thiserror::Error;

/// Errors raised across the crate.
///
/// Variants map onto the exit-code classes of the command line runner:
/// usage/config problems, numerical failures (truncation, quadrature,
/// conditioning) and statistical failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("quantization violated: {0}")]
    Quantization(String),
    #[error("tower depth must be at least {min}, got {got}")]
    Depth { min: usize, got: usize },
    #[error("level {j} out of range for a tower of depth {depth}")]
    LevelOutOfRange { j: usize, depth: usize },
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("invalid sublattice step {step}: {reason}")]
    InvalidSublattice { step: usize, reason: String },
    #[error("argument outside domain: {0}")]
    Domain(String),
    #[error("tail tolerance {rtol:e} unreachable within radius {max_radius}")]
    Truncation { rtol: f64, max_radius: f64 },
    #[error("reference kernel value {0:e} too small to normalise by")]
    DivisionDegenerate(f64),
    #[error("kernel diagonal vanishes numerically at {0}")]
    BaseLocus(String),
    #[error("coherent frame degenerate: condition number {cond:e}")]
    FrameDegenerate { cond: f64 },
    #[error("zero on contour boundary after {retries} retries")]
    BoundaryZero { retries: usize },
    #[error("winding integral {value} not within 0.25 of an integer")]
    NonIntegerWinding { value: f64 },
    #[error("found {found} zeros (with multiplicity), expected {expected}")]
    ZeroCountMismatch { found: usize, expected: usize },
    #[error("sampling failures {failed}/{total} exceed the 1% budget")]
    SamplingFailures { failed: usize, total: usize },
    #[error("statistical check failed: {0}")]
    Statistical(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures rooted in truncation, quadrature or conditioning.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Truncation { .. }
                | Error::DivisionDegenerate(_)
                | Error::BaseLocus(_)
                | Error::FrameDegenerate { .. }
                | Error::BoundaryZero { .. }
                | Error::NonIntegerWinding { .. }
                | Error::ZeroCountMismatch { .. }
                | Error::SamplingFailures { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
