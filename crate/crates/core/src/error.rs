use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("polygons overlap: {0}")]
    Overlap(String),
    #[error("polygon leaves the box [-d,d]x[0,1]: {0}")]
    OutOfBox(String),
    #[error("obstacles disconnect the strip: {0}")]
    Disconnected(String),
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),
    #[error("invalid resonator: {0}")]
    InvalidResonator(String),
    #[error("resonator feet collide: {0}")]
    FootCollision(String),
    #[error("resonator foot is not on a flat wall portion: {0}")]
    NonFlatWall(String),
    #[error("mesh generation failed: {0}")]
    MeshFailure(String),
    #[error("linear system is singular: {0}")]
    SingularSystem(String),
    #[error("point ({0}, {1}) is outside the meshed domain")]
    OutsideDomain(f64, f64),
    #[error("field solutions live on different meshes")]
    MeshMismatch,
    #[error("geometry is not mirror symmetric: {0}")]
    NotSymmetric(String),
    #[error("extrapolation did not converge: {0}")]
    NoConvergence(String),
    #[error("junction point is too close to an obstacle: {0}")]
    CornerTooClose(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("coupled resonator system is singular (|det| = {0:e})")]
    SingularCoupling(f64),
    #[error("obstacle reflects fully (|R| = {0}), no placement cancels it")]
    FullReflection(f64),
    #[error("obstacle does not reflect (|R| = {0:e}), nothing to cancel")]
    NoReflection(f64),
    #[error("minimum lies on the edge of the search window [{0}, {1}]")]
    WindowTooNarrow(f64, f64),
    #[error("transmission |T| = {0} is too small; add an intermediate resonator first")]
    SmallTransmission(f64),
    #[error("first cloaking step failed: {0}")]
    Step1Failure(String),
    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("i/o error: {0}")]
    Io(String),
}

/// Broad error classes, used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Numerical,
    Design,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            Overlap(_) | OutOfBox(_) | Disconnected(_) | InvalidPolygon(_) | InvalidResonator(_)
            | FootCollision(_) | NonFlatWall(_) | NotSymmetric(_) | Config { .. } | Io(_) => {
                ErrorClass::Config
            }
            MeshFailure(_) | SingularSystem(_) | OutsideDomain(..) | MeshMismatch
            | NoConvergence(_) | CornerTooClose(_) => ErrorClass::Numerical,
            Degenerate(_) | SingularCoupling(_) | FullReflection(_) | NoReflection(_)
            | WindowTooNarrow(..) | SmallTransmission(_) | Step1Failure(_) => ErrorClass::Design,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
