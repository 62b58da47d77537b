use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{func} evaluated outside its domain at {value}")]
    Domain { func: &'static str, value: f64 },
    #[error("division by a jet with zero value")]
    Singular,
    #[error("interior formula evaluated on or too close to the axis (rho = {rho})")]
    Axis { rho: f64 },
    #[error("point within the exclusion radius of the nut at z = {z}")]
    NutProximity { z: f64 },
    #[error("invalid rod data: {0}")]
    InvalidRodData(String),
    #[error("Ward inversion did not converge (last residual {residual:e})")]
    Inversion { residual: f64 },
    #[error("degenerate metric: {0}")]
    DegenerateMetric(String),
    #[error("invalid roots: {0}")]
    InvalidRoots(String),
    #[error("outside the coordinate domain: {0}")]
    OutOfDomain(String),
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
