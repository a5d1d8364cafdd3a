//! Geometry and probability cultures on the expected-utility space.
//!
//! An agent's expected-utility preferences over `m` candidates are a vector
//! in `R^m`, defined only up to a positive scale factor and an additive
//! constant. Quotienting by that equivalence leaves the *utility space*: an
//! `(m-2)`-sphere sitting in the zero-sum hyperplane `H`, plus one isolated
//! indifference point. This crate implements that construction and the
//! operations that make it useful for simulation work:
//!
//! * [`geometry`] — canonical spherical representatives, great-circle
//!   distance, inversion and permutation actions, and the hexagonal cube
//!   metric that exists only for `m = 3`;
//! * [`lottery`] — lotteries over candidates, bipoints, and the
//!   half-hyperplane preference test;
//! * [`cone`] — the summation operator as convex-cone membership, with an
//!   independent grid oracle for the unanimity characterization;
//! * [`ordinal`] — projection onto rankings with ties (permutohedron cells),
//!   Kendall distance and strict-order enumeration;
//! * [`cultures`] — seedable samplers for the uniform (Impartial Culture),
//!   Von Mises–Fisher and Mallows models;
//! * [`stats`] — facet histograms, chi-square uniformity tests, mean
//!   resultant vectors and geodesic-ball probabilities.

pub mod cone;
pub mod cultures;
pub mod error;
pub mod geometry;
pub mod lottery;
mod numeric;
pub mod ordinal;
pub mod stats;

pub use error::{Error, Result};
pub use geometry::{
    canonicalize, canonicalize_with_tol, cube_distance_m3, distance, hyperplane_basis, invert,
    permute, project_to_hyperplane, Permutation, RawUtility, UtilityPoint,
    DEFAULT_INDIFFERENCE_TOL,
};
pub use lottery::{prefers, prefers_raw, Bipoint, Lottery, Preference};
pub use cone::{cone_distance, sum_contains, unanimity_oracle, CONE_FEASIBILITY_TOL};
pub use ordinal::{
    cell_kind, enumerate_strict_orders, kendall_tau, to_order, CellKind, PreferenceOrder,
    DEFAULT_TIE_TOL,
};
pub use cultures::{
    mallows_pmf, sample_mallows, sample_mallows_enumerated, sample_one, sample_population,
    sample_uniform, sample_vmf, vmf_log_density, CultureKind, CultureSampler, CultureSpec,
    MallowsEnumeration, Pole, RandomStream, Sample, VmfModel,
};
pub use stats::{
    ball_probability, chi_square_pvalue, chi_square_uniformity, empirical_density_ratio,
    facet_histogram, mean_resultant, report_from_orders, report_from_points, PopulationReport,
};
