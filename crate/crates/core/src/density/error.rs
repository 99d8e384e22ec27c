use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DensityError {
    #[error("state has dimension {got}, density has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("state entry {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },
    #[error("unknown coordinate `{0}`")]
    UnknownCoordinate(String),
    #[error("coordinate index {0} out of range")]
    CoordinateOutOfRange(usize),
    #[error("variable `{0}` is not a latent coordinate")]
    UnknownVariable(String),
    #[error("state is outside the support of the density")]
    OutsideSupport,
    #[error("region explosion: more than {cap} guard combinations would be reachable")]
    RegionExplosion { cap: usize },
    #[error("malformed model: {0}")]
    Malformed(String),
}
