use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    Lattice(String),
    #[error("invalid configuration: {0}")]
    Configuration(String),
    #[error("invalid density profile: {0}")]
    Profile(String),
    #[error("profile is not interior (values must stay in (0,1)): min {min}, max {max}")]
    NonInterior { min: f64, max: f64 },
    #[error("invalid local rate: {0}")]
    LocalRate(String),
    #[error("particle count {k} out of range for {n} sites")]
    ParticleCount { k: usize, n: usize },
    #[error("enumeration budget exceeded: window {ell} > {max}")]
    EnumerationBudget { ell: usize, max: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("tilt rate bound violated: {0}")]
    RateBound(String),
    #[error("quadrature tolerance not met: estimated error {estimate:e} > {tolerance:e}")]
    Quadrature { estimate: f64, tolerance: f64 },
    #[error("event log was not recorded for this trajectory")]
    MissingEventLog,
    #[error("unlabeled event at t = {0} in environment path")]
    UnlabeledEvent(f64),
    #[error("stability condition violated: {0}")]
    Stability(String),
    #[error("quadratic form is indefinite (min eigenvalue {min_eigenvalue:e})")]
    Indefinite { min_eigenvalue: f64 },
    #[error("no feasible tilt found; bound is vacuous")]
    NoFeasibleTilt,
    #[error("config: {0}")]
    Config(String),
    #[error("malformed trajectory dump: {0}")]
    Dump(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
