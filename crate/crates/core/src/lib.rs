//! Cyclic and simultaneous projection methods onto linear and affine
//! subspaces of `Rⁿ`.
//!
//! The crate computes Friedrichs numbers along independent routes, builds the
//! iteration operators `(1/r)∑P_{M_i}` and `P_{M_r}⋯P_{M_1}`, evaluates the
//! exact norms of their error operators `T^k − P_M` and checks them against
//! closed-form optimal rates. The [`experiment`] module wraps all of it in a
//! scenario runner with JSON/CSV reports.

pub mod affine;
pub mod angles;
pub mod error;
pub mod experiment;
pub mod numlin;
pub mod productspace;
pub mod projmethods;
pub mod subspace;
pub mod tolerances;

pub use affine::{
    affine_from_point_span, cyclic_affine, intersection_affine, project_affine,
    simultaneous_affine, AffineSubspace,
};
pub use angles::{cos_two, friedrichs_from_norm, friedrichs_gram, FriedrichsResult, FriedrichsRoute};
pub use error::{Error, Result};
pub use numlin::{Matrix, RankTolerance, Vector};
pub use productspace::{
    build_product, verify_norm_chain, verify_pierra_lift, NormChain, NormChainEvaluator,
    ProductSpaceModel,
};
pub use projmethods::{
    compare_methods, cyclic_bound, cyclic_operator, error_operator_norm, iterate, kw_bound,
    optimal_bound_simultaneous, simultaneous_operator, verify_error_identity, IterKind,
    IterOperator, IterationTrace,
};
pub use subspace::{intersection, reduced_component, ProjectorOp, Subspace};
pub use tolerances::Tolerances;
