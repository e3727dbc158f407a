use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("lattice needs at least one extent")]
    EmptyExtents,
    #[error("lattice extent {axis} is zero")]
    ZeroExtent { axis: usize },
    #[error("site {site} out of range for lattice of {len} sites")]
    SiteOutOfRange { site: usize, len: usize },
    #[error("site set is empty")]
    EmptySiteSet,
    #[error("point has {got} coordinates, lattice has {expected} sites")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("grid of {nodes} nodes exceeds budget {budget}")]
    BudgetExceeded { nodes: u128, budget: u128 },
    #[error("grid route supports at most {max} lattice sites, got {got}")]
    GridDimensionTooLarge { max: usize, got: usize },
    #[error("Gibbs normalizer is not positive and finite: {0}")]
    DegenerateNormalizer(f64),
    #[error("solver stopped after {iterations} iterations with relative residual {residual:e}")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("operator is not positive definite: {0}")]
    Indefinite(String),
    #[error("eigen-solver did not converge on a {dim}x{dim} matrix")]
    EigenFailure { dim: usize },
    #[error("non-finite energy encountered at step {step}")]
    NonFiniteEnergy { step: usize, state: Vec<f64> },
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("coordinate {site} has zero variance")]
    ZeroVariance { site: usize },
    #[error("supports overlap but are not identical")]
    OverlappingSupports,
    #[error("weighted convexity certificate is not admissible (delta0 = {delta0})")]
    Inadmissible { delta0: f64 },
    #[error("need at least 3 profile points above the noise floor, got {got}")]
    TooFewFitPoints { got: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
