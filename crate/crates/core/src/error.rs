//! Error type shared by all modules of the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong when constructing or combining utility-space
/// values. Operations that are total simply do not return `Result`.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A utility vector must be non-empty and contain only finite entries.
    #[error("invalid utility vector: {0}")]
    InvalidUtility(String),

    /// A lottery must have nonnegative entries summing to one.
    #[error("invalid lottery: {0}")]
    InvalidLottery(String),

    /// A bipoint must lie in the zero-sum hyperplane.
    #[error("invalid bipoint: coordinates sum to {0:e}, expected 0")]
    InvalidBipoint(f64),

    /// The indifference point has no representative on the sphere, so
    /// metric operations must exclude it.
    #[error("the indifference point is excluded from the metric sphere")]
    IndifferencePoint,

    /// Two arguments live over different numbers of candidates.
    #[error("dimension mismatch: expected m = {expected}, got m = {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// An operation only defined for a specific ambient dimension.
    #[error("operation requires m = {required}, got m = {actual}")]
    DimensionError { required: usize, actual: usize },

    /// A sequence of candidate indices that is not a permutation of `0..m`.
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    /// A preference order whose tiers do not partition the candidate set.
    #[error("invalid preference order: {0}")]
    InvalidOrder(String),

    /// The operation needs strict orders (all tiers singletons).
    #[error("operation requires strict orders, found ties")]
    NonStrictOrder,

    /// Enumerating all strict orders is capped at m = 8 (8! = 40320).
    #[error("size limit exceeded: m = {m}, supported only up to m = {max}")]
    SizeLimit { m: usize, max: usize },

    /// A culture specification that violates its own constraints.
    #[error("invalid culture spec: {0}")]
    InvalidSpec(String),

    /// Statistics over an empty (or all-indifferent) population.
    #[error("population has no non-indifferent members")]
    EmptyPopulation,

    /// The mean resultant vector cancelled out; no direction is defined.
    #[error("mean resultant vector is degenerate (norm <= 1e-12)")]
    DegenerateMean,

    /// Chi-square uniformity is only defined over strict orders.
    #[error("histogram contains non-strict keys")]
    NonStrictKeys,

    /// Ball statistics need a non-indifferent center.
    #[error("ball center must not be the indifference point")]
    IndifferenceCenter,

    /// Ball radius must lie in (0, pi].
    #[error("ball radius {0} outside (0, pi]")]
    InvalidRadius(f64),

    /// Density ratio against a reference ball that captured no points.
    #[error("reference ball probability is zero; density ratio is infinite")]
    InfiniteRatio,
}
