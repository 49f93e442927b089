//! Affine subspaces `V = v + (V − V)` and projection methods onto them.
//!
//! Projections use the translation formula `P_V(x) = v + P_{V−V}(x − v)`.
//! Anchors are canonical: `v = P_V(0)`, the least-norm point of `V`, which is
//! orthogonal to the direction space.


use crate::error::{Error, Result};
use crate::numlin::{self, Matrix, RankTolerance, Vector};
use crate::projmethods::{cyclic_rate, simultaneous_rate, IterationTrace};
use crate::subspace::{check_dim, intersection, Subspace};
use crate::tolerances::{CONTAINMENT, FEASIBILITY};

#[derive(Debug, Clone, PartialEq)]
pub struct AffineSubspace {
    anchor: Vector,
    direction: Subspace,
}

impl AffineSubspace {
    /// `point + direction`, re-anchored at the least-norm point.
    pub fn new(point: &Vector, direction: Subspace) -> Result<Self> {
        check_dim(direction.ambient_dim(), point.len())?;
        numlin::ensure_finite_vec(point)?;
        let anchor = point - direction.project(point)?;
        Ok(AffineSubspace { anchor, direction })
    }

    pub fn linear(direction: Subspace) -> Self {
        AffineSubspace {
            anchor: Vector::zeros(direction.ambient_dim()),
            direction,
        }
    }

    pub fn anchor(&self) -> &Vector {
        &self.anchor
    }

    pub fn direction(&self) -> &Subspace {
        &self.direction
    }

    pub fn ambient_dim(&self) -> usize {
        self.direction.ambient_dim()
    }

    pub fn project(&self, x: &Vector) -> Result<Vector> {
        check_dim(self.ambient_dim(), x.len())?;
        let shifted = x - &self.anchor;
        Ok(self.direction.project(&shifted)? + &self.anchor)
    }

    pub fn contains(&self, x: &Vector) -> Result<bool> {
        check_dim(self.ambient_dim(), x.len())?;
        let shifted = x - &self.anchor;
        let off = &shifted - self.direction.project(&shifted)?;
        Ok(off.norm() <= CONTAINMENT)
    }
}

/// `point + span(columns of spanning)`.
pub fn affine_from_point_span(point: &Vector, spanning: &Matrix) -> Result<AffineSubspace> {
    check_dim(spanning.nrows(), point.len())?;
    let direction = Subspace::from_spanning(spanning, RankTolerance::default())?;
    AffineSubspace::new(point, direction)
}

pub fn project_affine(v: &AffineSubspace, x: &Vector) -> Result<Vector> {
    v.project(x)
}

fn common_dim(list: &[AffineSubspace]) -> Result<usize> {
    let first = list
        .first()
        .ok_or_else(|| Error::invalid("expected at least one affine subspace"))?;
    let n = first.ambient_dim();
    for v in &list[1..] {
        check_dim(n, v.ambient_dim())?;
    }
    Ok(n)
}

/// `∩ V_i`, or [`Error::Infeasible`] when the intersection is empty.
///
/// The anchor is the least-norm least-squares solution of the stacked system
/// `(I − P_i) x = (I − P_i) v_i`; a relative residual above
/// [`FEASIBILITY`] (scaled by `max(1, max_i ‖v_i‖)`) means no common point.
pub fn intersection_affine(list: &[AffineSubspace]) -> Result<AffineSubspace> {
    let n = common_dim(list)?;
    if list.len() == 1 {
        return Ok(list[0].clone());
    }
    let directions: Vec<Subspace> = list.iter().map(|v| v.direction.clone()).collect();
    let direction = intersection(&directions)?;

    let identity = Matrix::identity(n, n);
    let mut system = Matrix::zeros(n * list.len(), n);
    let mut rhs = Vector::zeros(n * list.len());
    for (i, v) in list.iter().enumerate() {
        let complement = &identity - v.direction.projector().into_matrix();
        rhs.rows_mut(i * n, n).copy_from(&(&complement * &v.anchor));
        system.rows_mut(i * n, n).copy_from(&complement);
    }
    let solution = numlin::least_squares(&system, &rhs, RankTolerance::default())?;

    let scale = list
        .iter()
        .map(|v| v.anchor.norm())
        .fold(1.0, f64::max);
    let residual = (&system * &solution - &rhs).norm() / scale;
    if residual > FEASIBILITY {
        return Err(Error::Infeasible {
            residual,
            threshold: FEASIBILITY,
        });
    }
    AffineSubspace::new(&solution, direction)
}

fn need_start(n: usize, x0: &Vector) -> Result<()> {
    check_dim(n, x0.len())?;
    numlin::ensure_finite_vec(x0)
}

/// Iterate `x ← (1/r)∑ P_{V_i}(x)` with direct affine projections.
///
/// `errors[k] = ‖x_k − P_V(x0)‖`, `bounds[k] = q^k ‖x0 − P_V(0)‖` where `q` is
/// the optimal simultaneous rate of the direction spaces.
pub fn simultaneous_affine(
    list: &[AffineSubspace],
    x0: &Vector,
    k_max: usize,
) -> Result<IterationTrace> {
    let n = common_dim(list)?;
    need_start(n, x0)?;
    let target = intersection_affine(list)?;
    let directions: Vec<Subspace> = list.iter().map(|v| v.direction.clone()).collect();
    let rate = simultaneous_rate(&directions)?;
    let r = list.len() as f64;
    run_affine(&target, x0, k_max, rate, |x| {
        let mut next = Vector::zeros(n);
        for v in list {
            next += v.project(x)?;
        }
        Ok(next / r)
    })
}

/// Iterate full sweeps `x ← P_{V_r}(⋯P_{V_1}(x))`.
///
/// `bounds[k] = ‖∏ P_{(V_i − V_i) ∩ (V − V)^⊥}‖^k ‖x0 − P_V(0)‖`.
pub fn cyclic_affine(list: &[AffineSubspace], x0: &Vector, k_max: usize) -> Result<IterationTrace> {
    let n = common_dim(list)?;
    need_start(n, x0)?;
    let target = intersection_affine(list)?;
    let directions: Vec<Subspace> = list.iter().map(|v| v.direction.clone()).collect();
    let rate = cyclic_rate(&directions)?;
    run_affine(&target, x0, k_max, rate, |x| {
        let mut y = x.clone();
        for v in list {
            y = v.project(&y)?;
        }
        Ok(y)
    })
}

fn run_affine(
    target: &AffineSubspace,
    x0: &Vector,
    k_max: usize,
    rate: f64,
    mut step: impl FnMut(&Vector) -> Result<Vector>,
) -> Result<IterationTrace> {
    let limit = target.project(x0)?;
    // The canonical anchor is P_V(0).
    let scale = (x0 - &target.anchor).norm();
    let mut errors = Vec::with_capacity(k_max + 1);
    let mut bounds = Vec::with_capacity(k_max + 1);
    let mut x = x0.clone();
    let mut factor = 1.0;
    for k in 0..=k_max {
        if k > 0 {
            x = step(&x)?;
            factor *= rate;
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

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn v2(a: f64, b: f64) -> Vector {
        Vector::from_vec(vec![a, b])
    }

    fn horizontal(y: f64) -> AffineSubspace {
        affine_from_point_span(&v2(0.0, y), &Matrix::from_column_slice(2, 1, &[1.0, 0.0])).unwrap()
    }

    fn vertical(x: f64) -> AffineSubspace {
        affine_from_point_span(&v2(x, 0.0), &Matrix::from_column_slice(2, 1, &[0.0, 1.0])).unwrap()
    }

    #[test]
    fn construction_examples() {
        let line = horizontal(1.0);
        assert_abs_diff_eq!(*line.anchor(), v2(0.0, 1.0), epsilon = 1e-15);

        let shifted =
            affine_from_point_span(&v2(3.0, 1.0), &Matrix::from_column_slice(2, 1, &[1.0, 0.0]))
                .unwrap();
        assert_abs_diff_eq!(*shifted.anchor(), v2(0.0, 1.0), epsilon = 1e-15);

        let through_origin = affine_from_point_span(
            &Vector::zeros(3),
            &Matrix::from_column_slice(3, 1, &[1.0, 2.0, 3.0]),
        )
        .unwrap();
        assert_eq!(*through_origin.anchor(), Vector::zeros(3));

        assert!(matches!(
            affine_from_point_span(&Vector::zeros(3), &Matrix::zeros(2, 1)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn projection_examples() {
        assert_abs_diff_eq!(
            project_affine(&horizontal(1.0), &v2(3.0, 5.0)).unwrap(),
            v2(3.0, 1.0),
            epsilon = 1e-15
        );
        let on = v2(-7.0, 1.0);
        assert_abs_diff_eq!(project_affine(&horizontal(1.0), &on).unwrap(), on, epsilon = 1e-15);

        let point = AffineSubspace::new(&v2(2.0, -1.0), Subspace::trivial(2)).unwrap();
        assert_eq!(project_affine(&point, &v2(9.0, 9.0)).unwrap(), v2(2.0, -1.0));
        assert!(project_affine(&point, &Vector::zeros(3)).is_err());
    }

    #[test]
    fn intersection_examples() {
        let p = intersection_affine(&[horizontal(1.0), vertical(2.0)]).unwrap();
        assert!(p.direction().is_trivial());
        assert_abs_diff_eq!(*p.anchor(), v2(2.0, 1.0), epsilon = 1e-14);

        assert!(matches!(
            intersection_affine(&[horizontal(0.0), horizontal(1.0)]),
            Err(Error::Infeasible { .. })
        ));

        let same = intersection_affine(&[horizontal(1.0), horizontal(1.0)]).unwrap();
        assert_eq!(same.direction().dim(), 1);
        assert_abs_diff_eq!(*same.anchor(), v2(0.0, 1.0), epsilon = 1e-14);
    }

    #[test]
    fn simultaneous_perpendicular_lines() {
        let list = [horizontal(1.0), vertical(2.0)];
        let tr = simultaneous_affine(&list, &Vector::zeros(2), 3).unwrap();
        // x1 = ((0,1) + (2,0))/2 = (1, 0.5); distance to (2,1) is √1.25.
        assert_abs_diff_eq!(tr.errors[1], 1.25f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(tr.bounds[1], 0.5 * 5f64.sqrt(), epsilon = 1e-14);
        assert!(tr.max_violation() <= 1e-14);

        let tr = simultaneous_affine(&list, &v2(2.0, 1.0), 3).unwrap();
        assert!(tr.errors.iter().all(|&e| e < 1e-14));
    }

    #[test]
    fn simultaneous_equal_subspaces_converge_in_one_step() {
        let list = [horizontal(1.0), horizontal(1.0), horizontal(1.0)];
        let tr = simultaneous_affine(&list, &v2(4.0, -3.0), 3).unwrap();
        assert!(tr.errors[0] > 1.0);
        assert!(tr.errors[1..].iter().all(|&e| e < 1e-14));
    }

    #[test]
    fn cyclic_perpendicular_lines() {
        let list = [horizontal(1.0), vertical(2.0)];
        let tr = cyclic_affine(&list, &Vector::zeros(2), 2).unwrap();
        assert!(tr.errors[1] < 1e-15);
        let tr = cyclic_affine(&list, &v2(2.0, 1.0), 2).unwrap();
        assert!(tr.errors.iter().all(|&e| e < 1e-14));
    }

    #[test]
    fn infeasible_iteration_is_an_error() {
        let list = [horizontal(0.0), horizontal(2.0)];
        assert!(matches!(
            simultaneous_affine(&list, &Vector::zeros(2), 2),
            Err(Error::Infeasible { .. })
        ));
        assert!(cyclic_affine(&list, &Vector::zeros(2), 2).is_err());
    }
}
