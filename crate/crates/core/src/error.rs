use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("binomial coefficient C({n}, {k}) overflows u128")]
    BinomialOverflow { n: u64, k: i64 },

    #[error("loss must be a finite non-negative number of dB, got {0}")]
    InvalidLoss(f64),

    #[error("amplitude transmission must lie in (0, 1], got {0}")]
    InvalidTransmission(f64),

    #[error("beam-splitter angle {0} lies outside [0, pi/2]")]
    InvalidAngle(f64),

    #[error("expected {expected} amplitudes for N = {n}, got {got}")]
    WrongLength { n: usize, expected: usize, got: usize },

    #[error("amplitude vector is zero or not finite")]
    ZeroState,

    #[error("state norm deviates from 1 by {deviation:e}, above the accepted {tolerance:e}")]
    NotNormalized { deviation: f64, tolerance: f64 },

    #[error("photon numbers differ: {0} vs {1}")]
    PhotonNumberMismatch(usize, usize),

    #[error("block {block} has dimension {got}, expected {expected}")]
    DimensionMismatch { block: usize, expected: usize, got: usize },

    #[error("beam-splitter coefficients are not unitary: |tau|^2 + |rho|^2 = {0}")]
    NotUnitary(f64),

    #[error("photon number {n} exceeds the oracle limit {max}")]
    OracleLimit { n: usize, max: usize },

    #[error("{0} requires at least one photon")]
    NoPhotons(&'static str),

    #[error("mode occupation m = {m} must satisfy N/2 < m <= N for N = {n}")]
    InvalidSplit { n: usize, m: usize },

    #[error(
        "ill-conditioned phase: outcome ({m1}, {m2}) has P = {probability:e} but dP/dphi = {derivative:e}"
    )]
    IllConditioned { m1: usize, m2: usize, probability: f64, derivative: f64 },

    #[error("finite-difference step {0} outside [1e-6, 1e-3]")]
    InvalidStep(f64),

    #[error("power-law fit needs at least 3 points, got {0}")]
    TooFewPoints(usize),

    #[error("power-law fit needs positive data, got ({0}, {1})")]
    NonPositive(f64, f64),

    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed state file: {0}")]
    StateFile(String),
}
