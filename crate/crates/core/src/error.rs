use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("grid of {m} points cannot resolve degree {n} (need m > 2n)")]
    GridTooSmall { m: usize, n: usize },
    #[error("point {0} is not inside the open unit disk")]
    OutsideDisk(Point),
    #[error("coincident arguments: kernel is singular")]
    Singular,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("integrability guard violated: {0}")]
    GuardViolated(String),
    #[error("{what} did not converge (residual {residual:e})")]
    NonConvergence { what: &'static str, residual: f64 },
    #[error("covariance matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("zero ball mass at grid index {0}")]
    ZeroBallMass(usize),
    #[error("symbol has no realizing disk function")]
    MissingRealization,
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Complex point carried by [`Error::OutsideDisk`].
#[derive(Debug, Clone, Copy)]
pub struct Point(pub f64, pub f64);

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.0, self.1)
    }
}

impl From<num_complex::Complex64> for Point {
    fn from(z: num_complex::Complex64) -> Self {
        Point(z.re, z.im)
    }
}
