use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid-extent: {0}")]
    InvalidExtent(String),
    #[error("invalid-count: {0}")]
    InvalidCount(String),
    #[error("dimension-mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("parse-error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("validation-error in field `{field}`: {msg}")]
    Validation { field: String, msg: String },
    #[error("size-exceeded: {0} particles, at most 4 supported")]
    SizeExceeded(usize),
    #[error("no-convergence after {iterations} iterations (last residual {last:.3e})")]
    NoConvergence {
        iterations: usize,
        last: f64,
        history: Vec<f64>,
    },
    #[error("degenerate-ground-state: E0 = {e0}, next state in sector E1 = {e1}")]
    DegenerateGroundState { e0: f64, e1: f64 },
    #[error("degenerate-fermi-level: species {species}, gap {gap:.3e}")]
    DegenerateFermiLevel { species: usize, gap: f64 },
    #[error("too-few-particles: species {species} has {count}, need at least 2")]
    TooFewParticles { species: usize, count: usize },
    #[error("missing-species: coupling density needs both species populated")]
    MissingSpecies,
    #[error("missing-oracle: exact-oracle functional requires an exact density set")]
    MissingOracle,
    #[error("not-differentiable: exact-oracle channels have no potential")]
    NotDifferentiable,
    #[error("unstable-inversion: {0}")]
    UnstableInversion(String),
    #[error("constraint-violation: mass-weighted position sum is {0:.3e}")]
    ConstraintViolation(f64),
    #[error("box-too-small: edge density {edge:.3e} exceeds {limit:.0e}")]
    BoxTooSmall { edge: f64, limit: f64 },
    #[error("io-error: {0}")]
    Io(String),
}

impl Error {
    /// Numerical failures map to exit status 2, everything else to 1.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. }
                | Error::DegenerateGroundState { .. }
                | Error::DegenerateFermiLevel { .. }
                | Error::UnstableInversion(_)
                | Error::BoxTooSmall { .. }
        )
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidExtent(_) => "invalid-extent",
            Error::InvalidCount(_) => "invalid-count",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::Parse { .. } => "parse-error",
            Error::Validation { .. } => "validation-error",
            Error::SizeExceeded(_) => "size-exceeded",
            Error::NoConvergence { .. } => "no-convergence",
            Error::DegenerateGroundState { .. } => "degenerate-ground-state",
            Error::DegenerateFermiLevel { .. } => "degenerate-fermi-level",
            Error::TooFewParticles { .. } => "too-few-particles",
            Error::MissingSpecies => "missing-species",
            Error::MissingOracle => "missing-oracle",
            Error::NotDifferentiable => "not-differentiable",
            Error::UnstableInversion(_) => "unstable-inversion",
            Error::ConstraintViolation(_) => "constraint-violation",
            Error::BoxTooSmall { .. } => "box-too-small",
            Error::Io(_) => "io-error",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
