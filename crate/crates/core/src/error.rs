use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("node {0} has zero out-degree")]
    DanglingNode(usize),

    #[error("invalid absorption configuration: {0}")]
    InvalidAbsorption(String),

    #[error("Markov time {t} is infeasible for the linear input (must satisfy 0 < t < {bound})")]
    InfeasibleMarkovTime { t: f64, bound: f64 },

    #[error("transition matrix is not regular: {0}")]
    NotRegular(String),

    #[error("linear system did not converge or is numerically singular: {0}")]
    NonConvergent(String),

    #[error("group inverse does not exist: rank(X) = {rank_x} but rank(X^2) = {rank_x2}")]
    RankDeficiencyMismatch { rank_x: usize, rank_x2: usize },

    #[error("graph is not strongly connected")]
    NotStronglyConnected,

    #[error("spectral radius {0} of the series term is not below 1")]
    SpectralRadiusTooLarge(f64),

    #[error("no eligible community bridge left when building stage {stage}")]
    ExhaustedBridges { stage: usize },

    #[error("invalid probability vector: {0}")]
    InvalidProbability(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("matrix is not column-stochastic: {0}")]
    NotStochastic(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
