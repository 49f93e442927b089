//! Every numeric threshold used by checks and preconditions, in one place.
//! Reports echo [`Tolerances::default`] so a run can be audited afterwards.

use serde::{Deserialize, Serialize};

/// Subspace containment `‖(I − P_A) P_B‖`.
pub const CONTAINMENT: f64 = 1e-10;
/// Relative residual of the stacked affine membership system.
pub const FEASIBILITY: f64 = 1e-8;
/// Adjacent differences in the exact norm chain.
pub const NORM_CHAIN: f64 = 1e-8;
/// Two-subspace alternating projections against `cos^(2k−1)`.
pub const KW: f64 = 1e-9;
/// `T^k − P_M` against `(T − P_M)^k`.
pub const LEMMA_IDENTITY: f64 = 1e-9;
/// Product-space lift against the base iteration.
pub const PIERRA_LIFT: f64 = 1e-9;
/// Trajectory error above its attached bound.
pub const BOUND_VIOLATION: f64 = 1e-10;
/// Adversarial start falling short of the optimal bound.
pub const TIGHTNESS: f64 = 1e-8;
/// Ordering slack between alternating and simultaneous bounds.
pub const COMPARE: f64 = 1e-12;
/// Agreement of independent Friedrichs-number routes.
pub const ROUTE_AGREEMENT: f64 = 1e-9;
/// Margin below 1 required of finite-dimensional rate quantities.
pub const STRICT_BELOW_ONE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub containment: f64,
    pub feasibility: f64,
    pub norm_chain: f64,
    pub kw: f64,
    pub lemma_identity: f64,
    pub pierra_lift: f64,
    pub bound_violation: f64,
    pub tightness: f64,
    pub compare: f64,
    pub route_agreement: f64,
    pub strict_below_one: f64,
    pub rank_relative_eps: f64,
    pub rank_absolute_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let rank = crate::numlin::RankTolerance::default();
        Tolerances {
            containment: CONTAINMENT,
            feasibility: FEASIBILITY,
            norm_chain: NORM_CHAIN,
            kw: KW,
            lemma_identity: LEMMA_IDENTITY,
            pierra_lift: PIERRA_LIFT,
            bound_violation: BOUND_VIOLATION,
            tightness: TIGHTNESS,
            compare: COMPARE,
            route_agreement: ROUTE_AGREEMENT,
            strict_below_one: STRICT_BELOW_ONE,
            rank_relative_eps: rank.relative_eps(),
            rank_absolute_floor: rank.absolute_floor(),
        }
    }
}
