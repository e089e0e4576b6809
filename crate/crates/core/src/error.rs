use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid system: {0}")]
    InvalidSpec(String),

    #[error("matrix has complex eigenvalues (discriminant {discriminant:e}); only the real case is handled")]
    ComplexEigenvalues { discriminant: f64 },

    #[error("rank condition fails: <A zeta, theta zeta> = {value:e}, zeta is an eigenvector of A")]
    LarcViolated { value: f64 },

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("matrix is not stable: eigenvalue {eigenvalue} is not negative")]
    NotStable { eigenvalue: f64 },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("operation requires {expected}, system is {actual}")]
    WrongCase { expected: &'static str, actual: String },

    #[error("operation not defined for control set variant {0}")]
    WrongVariant(&'static str),

    #[error("point is not in the image of the node map")]
    NotInImage,

    #[error("Newton inversion of the node map failed for a point the boundary test places inside")]
    InversionFailed,

    #[error("start point lies outside the interior of the control set")]
    StartOutsideControlSet,

    #[error("target point lies outside the interior of the control set")]
    TargetOutsideControlSet,

    #[error("point lies outside the open box of the saddle control set")]
    PointOutside,

    #[error("target point is not in the interior of the node control set")]
    TargetNotInInterior,

    #[error("no steering possible: {0}")]
    NoSteeringPossible(String),

    #[error("no interior probe point: system has {0}")]
    NoProbeAvailable(&'static str),
}
