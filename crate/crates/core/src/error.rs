use thiserror::Error;

/// Failures surfaced by the geometry, signal, bound and estimation layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate direction: target coincides with the reference point")]
    DegenerateDirection,
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(&'static str),
    #[error("Jacobian ill-conditioned: elevation {elevation_rad} rad is too close to the pole")]
    JacobianIllConditioned { elevation_rad: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("nuisance block singular (condition number {condition:e})")]
    NuisanceBlockSingular { condition: f64 },
    #[error("η unidentifiable: reduced Fisher information is not positive definite")]
    EtaUnidentifiable,
    #[error("position unobservable: location-domain information is singular")]
    PositionUnobservable,
    #[error("degenerate intersection: line/hyperboloid denominator {denominator:e} m² vanishes")]
    DegenerateIntersection { denominator: f64 },
    #[error("intersection behind RIS: x0 = {x0}")]
    IntersectionBehindRis { x0: f64 },
    #[error("spurious intersection: root lies on the opposite hyperboloid sheet")]
    SpuriousIntersection,
    #[error("closed-form solution inconsistent: NLOS delay equation off by {mismatch_s:e} s")]
    InconsistentDelays { mismatch_s: f64 },
    #[error("MCRB undefined: A matrix is singular")]
    McrbUndefined,
    #[error("no converged trials")]
    NoConvergedTrials,
    #[error("power-sweep invariant violated: {0}")]
    InvariantViolated(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
