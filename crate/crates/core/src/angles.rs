//! Friedrichs numbers.
//!
//! Three independent routes:
//!
//! * [`cos_two`]: largest principal-angle cosine between the reduced
//!   components `M_1 ∩ M^⊥` and `M_2 ∩ M^⊥` (two subspaces only);
//! * [`friedrichs_gram`]: the Rayleigh-quotient supremum over
//!   `x_i ∈ M_i ∩ M^⊥`, evaluated as the top eigenvalue of the block Gram
//!   matrix `[Q_iᵀ Q_j]` of the reduced bases;
//! * [`friedrichs_from_norm`] inverts
//!   `‖(1/r)∑P_i − P_M‖ = (r−1)/r · c + 1/r` for `c`.
//!
//! When every reduced component is trivial the supremum ranges over the
//! empty set. That case is reported as value 0 with `degenerate = true`,
//! which makes `c^(2k−1)` and `((r−1)/r · c + 1/r)`-type bounds read 0 where
//! the error operator vanishes. The norm route refuses it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numlin::{self, Matrix};
use crate::subspace::{common_ambient_dim, reduced_components, Subspace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FriedrichsRoute {
    GramBlock,
    NormInversion,
    PrincipalAngle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FriedrichsResult {
    /// Clamped to `[0, 1]`.
    pub value: f64,
    /// Value before clamping.
    pub raw: f64,
    pub degenerate: bool,
    pub route: FriedrichsRoute,
}

impl FriedrichsResult {
    fn computed(raw: f64, route: FriedrichsRoute) -> Self {
        FriedrichsResult {
            value: raw.clamp(0.0, 1.0),
            raw,
            degenerate: false,
            route,
        }
    }

    fn degenerate(route: FriedrichsRoute) -> Self {
        FriedrichsResult {
            value: 0.0,
            raw: 0.0,
            degenerate: true,
            route,
        }
    }
}

fn require_at_least_two(list: &[Subspace]) -> Result<usize> {
    if list.len() < 2 {
        return Err(Error::invalid(format!(
            "Friedrichs number needs at least two subspaces, got {}",
            list.len()
        )));
    }
    common_ambient_dim(list)
}

/// Cosine of the Friedrichs angle between two subspaces.
pub fn cos_two(m1: &Subspace, m2: &Subspace) -> Result<FriedrichsResult> {
    let pair = [m1.clone(), m2.clone()];
    common_ambient_dim(&pair)?;
    let (_, reduced) = reduced_components(&pair)?;
    if reduced.iter().any(Subspace::is_trivial) {
        return Ok(FriedrichsResult::degenerate(FriedrichsRoute::PrincipalAngle));
    }
    let cross = reduced[0].basis().transpose() * reduced[1].basis();
    Ok(FriedrichsResult::computed(
        numlin::sigma_max(&cross),
        FriedrichsRoute::PrincipalAngle,
    ))
}

/// Friedrichs number of `r ≥ 2` subspaces from the block Gram matrix of the
/// reduced components. This is the reference route.
pub fn friedrichs_gram(list: &[Subspace]) -> Result<FriedrichsResult> {
    require_at_least_two(list)?;
    let r = list.len() as f64;
    let (_, reduced) = reduced_components(list)?;
    let widths: Vec<usize> = reduced.iter().map(Subspace::dim).collect();
    let total: usize = widths.iter().sum();
    if total == 0 {
        return Ok(FriedrichsResult::degenerate(FriedrichsRoute::GramBlock));
    }
    let n = list[0].ambient_dim();
    let mut stacked = Matrix::zeros(n, total);
    let mut col = 0;
    for s in &reduced {
        stacked.columns_mut(col, s.dim()).copy_from(s.basis());
        col += s.dim();
    }
    let gram = stacked.transpose() * &stacked;
    let lambda = numlin::symmetric_max_eigenvalue(&gram)?;
    // sup ‖∑x_i‖² / ∑‖x_i‖² = λ_max(G); subtract the diagonal and normalize.
    Ok(FriedrichsResult::computed(
        (lambda - 1.0) / (r - 1.0),
        FriedrichsRoute::GramBlock,
    ))
}

/// Friedrichs number recovered from the norm of the simultaneous error
/// operator. Fails on degenerate input, where that norm is 0.
pub fn friedrichs_from_norm(list: &[Subspace]) -> Result<FriedrichsResult> {
    let n = require_at_least_two(list)?;
    let r = list.len() as f64;
    let m = crate::subspace::intersection(list)?;
    let mut error_op = Matrix::zeros(n, n);
    for s in list {
        error_op += s.projector().into_matrix();
    }
    error_op /= r;
    error_op -= m.projector().into_matrix();
    let nu = numlin::spectral_norm(&error_op)?;
    // Non-degenerate instances have ν ≥ 1/r; degenerate ones have ν = 0.
    if nu < 0.5 / r {
        return Err(Error::Degenerate(format!(
            "every subspace equals the intersection (error-operator norm {nu:e}); \
             the norm route cannot recover the Friedrichs number"
        )));
    }
    Ok(FriedrichsResult::computed(
        (r * nu - 1.0) / (r - 1.0),
        FriedrichsRoute::NormInversion,
    ))
}
