//! Simultaneous and cyclic projection operators, their trajectories and the
//! error bounds attached to them.
//!
//! For `T` either `(1/r)∑P_{M_i}` or `P_{M_r}⋯P_{M_1}` and `M = ∩M_i`, the
//! fixed-space projector is absorbed (`T P_M = P_M T = P_M`), hence
//! `T^k − P_M = (T − P_M)^k`. Norms of the error operator are computed from
//! powers of `T − P_M`, never as a difference of two nearly equal matrices.

use serde::{Deserialize, Serialize};

use crate::angles::{cos_two, friedrichs_gram};
use crate::error::{Error, Result};
use crate::numlin::{self, Matrix, Vector};
use crate::subspace::{check_dim, common_ambient_dim, reduced_components, ProjectorOp, Subspace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IterKind {
    Simultaneous,
    Cyclic,
}

/// An iteration operator together with its limit `P_M`.
#[derive(Debug, Clone)]
pub struct IterOperator {
    matrix: Matrix,
    kind: IterKind,
    limit: ProjectorOp,
    subspaces: Vec<Subspace>,
    rate: f64,
}

/// Errors `‖T^k x − P_M x‖` for `k = 0..=k_max` and the bound attached to each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub start: Vec<f64>,
    pub errors: Vec<f64>,
    pub bounds: Vec<f64>,
}

impl IterationTrace {
    /// Largest `errors[k] − bounds[k]`; non-positive when the bound holds.
    pub fn max_violation(&self) -> f64 {
        self.errors
            .iter()
            .zip(&self.bounds)
            .map(|(e, b)| e - b)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn k_max(&self) -> usize {
        self.errors.len().saturating_sub(1)
    }
}

fn nonempty(list: &[Subspace]) -> Result<usize> {
    if list.is_empty() {
        return Err(Error::invalid("an iteration needs at least one subspace"));
    }
    common_ambient_dim(list)
}

fn need_pair_list(list: &[Subspace]) -> Result<()> {
    if list.len() < 2 {
        return Err(Error::invalid(format!(
            "expected at least two subspaces, got {}",
            list.len()
        )));
    }
    common_ambient_dim(list).map(|_| ())
}

fn need_positive_k(k: usize) -> Result<()> {
    if k == 0 {
        Err(Error::invalid("k must be at least 1"))
    } else {
        Ok(())
    }
}

/// Optimal per-step rate `q = (r−1)/r · cos(M_1,…,M_r) + 1/r` of the
/// simultaneous method, 0 when the error operator vanishes.
pub fn simultaneous_rate(list: &[Subspace]) -> Result<f64> {
    nonempty(list)?;
    if list.len() == 1 {
        return Ok(0.0);
    }
    let r = list.len() as f64;
    let f = friedrichs_gram(list)?;
    if f.degenerate {
        return Ok(0.0);
    }
    Ok((r - 1.0) / r * f.value + 1.0 / r)
}

/// `‖P_{M_r ∩ M^⊥} ⋯ P_{M_1 ∩ M^⊥}‖`, the per-sweep contraction of the
/// cyclic method.
pub fn cyclic_rate(list: &[Subspace]) -> Result<f64> {
    let n = nonempty(list)?;
    let (_, reduced) = reduced_components(list)?;
    let mut product = Matrix::identity(n, n);
    for s in &reduced {
        product = s.projector().matrix() * product;
    }
    Ok(numlin::sigma_max(&product))
}

pub fn simultaneous_operator(list: &[Subspace]) -> Result<IterOperator> {
    let n = nonempty(list)?;
    let mut matrix = Matrix::zeros(n, n);
    for s in list {
        matrix += s.projector().into_matrix();
    }
    matrix /= list.len() as f64;
    Ok(IterOperator {
        matrix,
        kind: IterKind::Simultaneous,
        limit: crate::subspace::intersection(list)?.projector(),
        subspaces: list.to_vec(),
        rate: simultaneous_rate(list)?,
    })
}

/// `P_{M_r} ⋯ P_{M_1}`: the first subspace in `list` is applied first.
pub fn cyclic_operator(list: &[Subspace]) -> Result<IterOperator> {
    let n = nonempty(list)?;
    let mut matrix = Matrix::identity(n, n);
    for s in list {
        matrix = s.projector().matrix() * matrix;
    }
    Ok(IterOperator {
        matrix,
        kind: IterKind::Cyclic,
        limit: crate::subspace::intersection(list)?.projector(),
        subspaces: list.to_vec(),
        rate: cyclic_rate(list)?,
    })
}

impl IterOperator {
    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn kind(&self) -> IterKind {
        self.kind
    }

    pub fn limit_projector(&self) -> &ProjectorOp {
        &self.limit
    }

    pub fn subspaces(&self) -> &[Subspace] {
        &self.subspaces
    }

    pub fn ambient_dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Per-step factor of the attached trajectory bound: the optimal rate for
    /// the simultaneous kind, the reduced-product norm for the cyclic kind.
    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// `T − P_M`.
    pub fn error_operator(&self) -> Matrix {
        &self.matrix - self.limit.matrix()
    }

    /// Largest of `‖T P_M − P_M‖` and `‖P_M T − P_M‖`.
    pub fn absorption_defect(&self) -> f64 {
        let p = self.limit.matrix();
        let right = numlin::sigma_max(&(&self.matrix * p - p));
        let left = numlin::sigma_max(&(p * &self.matrix - p));
        right.max(left)
    }

    /// `‖T^k − P_M‖` for `k ≥ 1`, via repeated squaring of `T − P_M`.
    pub fn error_operator_norm(&self, k: usize) -> Result<f64> {
        need_positive_k(k)?;
        Ok(numlin::sigma_max(&numlin::matrix_power(
            &self.error_operator(),
            k,
        )))
    }

    /// Unit vector attaining `‖T − P_M‖`. For the self-adjoint simultaneous
    /// operator it attains `‖T^k − P_M‖` for every `k` at once.
    pub fn adversarial_start(&self) -> Result<Vector> {
        Ok(numlin::top_singular_pair(&self.error_operator())?.1)
    }
}

pub fn error_operator_norm(t: &IterOperator, k: usize) -> Result<f64> {
    t.error_operator_norm(k)
}

/// Run `k_max` steps from `x0` by matrix–vector products.
///
/// `bounds[k] = rate^k · ‖x0‖` with the operator's [`IterOperator::rate`].
pub fn iterate(t: &IterOperator, x0: &Vector, k_max: usize) -> Result<IterationTrace> {
    check_dim(t.ambient_dim(), x0.len())?;
    numlin::ensure_finite_vec(x0)?;
    let limit = t.limit.matrix() * x0;
    let scale = x0.norm();
    let mut errors = Vec::with_capacity(k_max + 1);
    let mut bounds = Vec::with_capacity(k_max + 1);
    let mut x = x0.clone();
    let mut factor = 1.0;
    for k in 0..=k_max {
        if k > 0 {
            x = &t.matrix * &x;
            factor *= t.rate;
        }
        errors.push((&x - &limit).norm());
        bounds.push(factor * scale);
    }
    Ok(IterationTrace {
        start: x0.iter().copied().collect(),
        errors,
        bounds,
    })
}

/// `q^k`, the smallest constant with `‖T^k x − P_M x‖ ≤ q^k ‖x‖` for all `x`.
pub fn optimal_bound_simultaneous(list: &[Subspace], k: usize) -> Result<f64> {
    need_pair_list(list)?;
    need_positive_k(k)?;
    Ok(simultaneous_rate(list)?.powi(k as i32))
}

/// `cos(M_1, M_2)^(2k−1)`, the exact norm of `(P_{M_2}P_{M_1})^k − P_M`.
pub fn kw_bound(m1: &Subspace, m2: &Subspace, k: usize) -> Result<f64> {
    need_positive_k(k)?;
    Ok(cos_two(m1, m2)?.value.powi(2 * k as i32 - 1))
}

/// `‖P_{M_r ∩ M^⊥} ⋯ P_{M_1 ∩ M^⊥}‖^k`, a valid but not necessarily optimal
/// bound for the cyclic method.
pub fn cyclic_bound(list: &[Subspace], k: usize) -> Result<f64> {
    need_pair_list(list)?;
    need_positive_k(k)?;
    Ok(cyclic_rate(list)?.powi(k as i32))
}

/// `‖(T^k − P_M) − (T − P_M)^k‖`, each side formed by plain repeated
/// multiplication.
pub fn verify_error_identity(t: &IterOperator, k: usize) -> Result<f64> {
    need_positive_k(k)?;
    let p = t.limit.matrix();
    let lhs = numlin::matrix_power_naive(&t.matrix, k) - p;
    let rhs = numlin::matrix_power_naive(&(&t.matrix - p), k);
    Ok(numlin::sigma_max(&(lhs - rhs)))
}

/// `(alternating bound, simultaneous bound)` for a pair at step `k`.
pub fn compare_methods(m1: &Subspace, m2: &Subspace, k: usize) -> Result<(f64, f64)> {
    Ok((
        kw_bound(m1, m2, k)?,
        optimal_bound_simultaneous(&[m1.clone(), m2.clone()], k)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numlin::RankTolerance;
    use approx::assert_abs_diff_eq;

    fn line(theta_deg: f64) -> Subspace {
        let t = theta_deg.to_radians();
        Subspace::from_spanning(
            &Matrix::from_column_slice(2, 1, &[t.cos(), t.sin()]),
            RankTolerance::default(),
        )
        .unwrap()
    }

    fn axis(n: usize, i: usize) -> Subspace {
        let mut v = Matrix::zeros(n, 1);
        v[(i, 0)] = 1.0;
        Subspace::from_spanning(&v, RankTolerance::default()).unwrap()
    }

    fn vec2(a: f64, b: f64) -> Vector {
        Vector::from_vec(vec![a, b])
    }

    #[test]
    fn simultaneous_operator_examples() {
        let t = simultaneous_operator(&[axis(2, 0), axis(2, 1)]).unwrap();
        assert_abs_diff_eq!(*t.matrix(), Matrix::identity(2, 2) * 0.5, epsilon = 1e-15);
        assert_eq!(*t.limit_projector().matrix(), Matrix::zeros(2, 2));

        let t = simultaneous_operator(&[Subspace::full(2), Subspace::full(2)]).unwrap();
        assert_abs_diff_eq!(*t.matrix(), Matrix::identity(2, 2), epsilon = 1e-15);
        assert_abs_diff_eq!(
            *t.limit_projector().matrix(),
            Matrix::identity(2, 2),
            epsilon = 1e-12
        );

        let t = simultaneous_operator(&[line(0.0), line(120.0), line(240.0)]).unwrap();
        assert_abs_diff_eq!(*t.matrix(), Matrix::identity(2, 2) * 0.5, epsilon = 1e-15);
        assert!(t.absorption_defect() < 1e-15);

        assert!(simultaneous_operator(&[]).is_err());
    }

    #[test]
    fn cyclic_operator_examples() {
        let t = cyclic_operator(&[axis(2, 0), axis(2, 1)]).unwrap();
        assert!(t.matrix().amax() < 1e-15);

        let s = line(30.0);
        let t = cyclic_operator(std::slice::from_ref(&s)).unwrap();
        assert_abs_diff_eq!(*t.matrix(), *s.projector().matrix(), epsilon = 1e-15);

        let t = cyclic_operator(&[line(0.0), line(60.0)]).unwrap();
        assert_abs_diff_eq!(numlin::sigma_max(t.matrix()), 0.5, epsilon = 1e-14);
        assert_eq!(t.kind(), IterKind::Cyclic);
    }

    #[test]
    fn cyclic_order_applies_first_subspace_first() {
        let a = line(0.0);
        let b = line(45.0);
        let t = cyclic_operator(&[a.clone(), b.clone()]).unwrap();
        let expected = b.projector().matrix() * a.projector().matrix();
        assert_abs_diff_eq!(*t.matrix(), expected, epsilon = 1e-15);
    }

    #[test]
    fn iterate_examples() {
        let t = simultaneous_operator(&[axis(2, 0), axis(2, 1)]).unwrap();
        let tr = iterate(&t, &vec2(1.0, 1.0), 4).unwrap();
        let s2 = 2f64.sqrt();
        for (k, e) in tr.errors.iter().enumerate() {
            assert_abs_diff_eq!(*e, s2 / 2f64.powi(k as i32), epsilon = 1e-15);
        }
        assert!(tr.max_violation() <= 1e-15);

        let t = simultaneous_operator(&[line(10.0), line(10.0)]).unwrap();
        let u = line(10.0).basis().column(0).into_owned();
        let tr = iterate(&t, &u, 3).unwrap();
        assert!(tr.errors.iter().all(|&e| e < 1e-15));

        let t = cyclic_operator(&[axis(2, 0), axis(2, 1)]).unwrap();
        let tr = iterate(&t, &vec2(1.0, 1.0), 3).unwrap();
        assert_abs_diff_eq!(tr.errors[0], s2, epsilon = 1e-15);
        assert!(tr.errors[1..].iter().all(|&e| e < 1e-15));

        assert!(matches!(
            iterate(&t, &Vector::zeros(3), 1),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn error_operator_norm_examples() {
        let sim = simultaneous_operator(&[line(0.0), line(60.0)]).unwrap();
        // Eigenvalues of (P1 + P2)/2 are (1 ± cos θ)/2.
        assert_abs_diff_eq!(sim.error_operator_norm(1).unwrap(), 0.75, epsilon = 1e-14);
        assert_abs_diff_eq!(
            sim.error_operator_norm(3).unwrap(),
            0.421875,
            epsilon = 1e-14
        );
        let cyc = cyclic_operator(&[line(0.0), line(60.0)]).unwrap();
        assert_abs_diff_eq!(cyc.error_operator_norm(2).unwrap(), 0.125, epsilon = 1e-14);
        assert!(cyc.error_operator_norm(0).is_err());
    }

    #[test]
    fn optimal_bound_examples() {
        let pair = [line(0.0), line(60.0)];
        assert_abs_diff_eq!(optimal_bound_simultaneous(&pair, 1).unwrap(), 0.75, epsilon = 1e-14);
        let triple = [line(0.0), line(120.0), line(240.0)];
        assert_abs_diff_eq!(
            optimal_bound_simultaneous(&triple, 2).unwrap(),
            0.25,
            epsilon = 1e-14
        );
        let axes = [axis(2, 0), axis(2, 1)];
        assert_abs_diff_eq!(
            optimal_bound_simultaneous(&axes, 3).unwrap(),
            0.125,
            epsilon = 1e-15
        );
        let same = [line(5.0), line(5.0)];
        assert_eq!(optimal_bound_simultaneous(&same, 2).unwrap(), 0.0);
        assert!(optimal_bound_simultaneous(&pair[..1], 1).is_err());
    }

    #[test]
    fn kw_bound_examples() {
        assert_abs_diff_eq!(kw_bound(&line(0.0), &line(60.0), 1).unwrap(), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(kw_bound(&line(0.0), &line(60.0), 2).unwrap(), 0.125, epsilon = 1e-14);
        for k in 1..5 {
            assert_abs_diff_eq!(
                kw_bound(&axis(2, 0), &axis(2, 1), k).unwrap(),
                0.0,
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn cyclic_bound_examples() {
        assert_abs_diff_eq!(
            cyclic_bound(&[line(0.0), line(60.0)], 1).unwrap(),
            0.5,
            epsilon = 1e-14
        );
        let e = |i| {
            let mut v = [0.0; 3];
            v[i] = 1.0;
            v
        };
        let plane = |a: [f64; 3], b: [f64; 3]| {
            let mut m = Matrix::zeros(3, 2);
            for i in 0..3 {
                m[(i, 0)] = a[i];
                m[(i, 1)] = b[i];
            }
            Subspace::from_spanning(&m, RankTolerance::default()).unwrap()
        };
        let list = [plane(e(0), e(1)), plane(e(1), e(2))];
        assert!(cyclic_bound(&list, 2).unwrap() < 1e-15);
        let same = [line(20.0), line(20.0), line(20.0)];
        assert_eq!(cyclic_bound(&same, 3).unwrap(), 0.0);
    }

    #[test]
    fn error_identity_examples() {
        let sim = simultaneous_operator(&[line(0.0), line(60.0)]).unwrap();
        assert_eq!(verify_error_identity(&sim, 1).unwrap(), 0.0);
        assert!(verify_error_identity(&sim, 4).unwrap() <= 1e-10);
        let cyc = cyclic_operator(&[axis(2, 0), axis(2, 1)]).unwrap();
        assert_eq!(verify_error_identity(&cyc, 3).unwrap(), 0.0);
    }

    #[test]
    fn compare_examples() {
        let (a, b) = compare_methods(&line(0.0), &line(60.0), 2).unwrap();
        assert_abs_diff_eq!(a, 0.125, epsilon = 1e-14);
        assert_abs_diff_eq!(b, 0.5625, epsilon = 1e-14);
        let (a, b) = compare_methods(&axis(2, 0), &axis(2, 1), 2).unwrap();
        assert_abs_diff_eq!(a, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b, 0.25, epsilon = 1e-15);
        let (a, b) = compare_methods(&line(0.0), &line(60.0), 1).unwrap();
        assert_abs_diff_eq!(a, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(b, 0.75, epsilon = 1e-14);
    }
}
