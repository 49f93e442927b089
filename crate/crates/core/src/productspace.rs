//! Simultaneous projections as alternating projections in a product space.
//!
//! For `M_1, …, M_r ⊆ Rⁿ` set `C = M_1 × ⋯ × M_r` and
//! `D = {(x, …, x)}` inside `R^{nr}`. The product space is usually given the
//! averaged inner product `⟨x, y⟩ = (1/r)∑⟨x_i, y_i⟩`. That is the standard
//! inner product scaled by the constant `1/r`, and a constant rescaling does
//! not change orthogonality, hence not the metric projections onto `C`, `D`
//! or `C ∩ D`, nor principal angles, nor operator norms (a ratio of two norms
//! scaled by the same factor). Everything here therefore works with the
//! standard inner product of `R^{nr}`; only the norm of a lifted vector
//! differs, `‖(x, …, x)‖ = √r ‖x‖` instead of `‖x‖`, and residuals below are
//! compared on the lifted side only.

use crate::angles::{cos_two, friedrichs_gram, FriedrichsResult};
use crate::error::{Error, Result};
use crate::numlin::{self, Matrix, Vector};
use crate::projmethods::{simultaneous_operator, simultaneous_rate, IterationTrace};
use crate::subspace::{check_dim, common_ambient_dim, intersection, Subspace};

#[derive(Debug, Clone)]
pub struct ProductSpaceModel {
    base_dim: usize,
    factors: Vec<Subspace>,
    c: Subspace,
    d: Subspace,
}

pub fn build_product(list: &[Subspace]) -> Result<ProductSpaceModel> {
    if list.len() < 2 {
        return Err(Error::invalid(format!(
            "product space needs at least two factors, got {}",
            list.len()
        )));
    }
    let n = common_ambient_dim(list)?;
    let r = list.len();
    let total: usize = list.iter().map(Subspace::dim).sum();
    let mut c_basis = Matrix::zeros(n * r, total);
    let mut col = 0;
    for (i, s) in list.iter().enumerate() {
        c_basis
            .view_mut((i * n, col), (n, s.dim()))
            .copy_from(s.basis());
        col += s.dim();
    }
    let scale = 1.0 / (r as f64).sqrt();
    let mut d_basis = Matrix::zeros(n * r, n);
    for i in 0..r {
        d_basis
            .view_mut((i * n, 0), (n, n))
            .copy_from(&(Matrix::identity(n, n) * scale));
    }
    Ok(ProductSpaceModel {
        base_dim: n,
        factors: list.to_vec(),
        c: Subspace::from_orthonormal(c_basis)?,
        d: Subspace::from_orthonormal(d_basis)?,
    })
}

impl ProductSpaceModel {
    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn factor_count(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[Subspace] {
        &self.factors
    }

    /// `M_1 × ⋯ × M_r`.
    pub fn c(&self) -> &Subspace {
        &self.c
    }

    /// The diagonal `{(x, …, x)}`.
    pub fn d(&self) -> &Subspace {
        &self.d
    }

    pub fn c_cap_d(&self) -> Result<Subspace> {
        intersection(&[self.c.clone(), self.d.clone()])
    }

    /// `(x, …, x)`.
    pub fn lift_diag(&self, x: &Vector) -> Result<Vector> {
        check_dim(self.base_dim, x.len())?;
        let r = self.factor_count();
        Ok(Vector::from_iterator(
            self.base_dim * r,
            (0..r).flat_map(|_| x.iter().copied()),
        ))
    }

    /// `cos(C, D)`, computed entirely in `R^{nr}`.
    pub fn cos_cd(&self) -> Result<FriedrichsResult> {
        cos_two(&self.c, &self.d)
    }

    /// `P_D P_C P_D`.
    pub fn sandwich_operator(&self) -> Matrix {
        let pc = self.c.projector().into_matrix();
        let pd = self.d.projector().into_matrix();
        &pd * pc * &pd
    }

    /// `P_D P_C`.
    pub fn alternating_operator(&self) -> Matrix {
        self.d.projector().into_matrix() * self.c.projector().into_matrix()
    }
}

pub fn lift_diag(model: &ProductSpaceModel, x: &Vector) -> Result<Vector> {
    model.lift_diag(x)
}

pub fn cos_cd(model: &ProductSpaceModel) -> Result<f64> {
    Ok(model.cos_cd()?.value)
}

/// The six members of the exact-norm chain for the simultaneous method, in
/// order:
///
/// 0. `‖T^k − P_M‖` from an explicit power of `T`
/// 1. `‖T − P_M‖^k`
/// 2. `((r−1)/r · cos(M_1,…,M_r) + 1/r)^k`
/// 3. `cos(C, D)^{2k}`
/// 4. `‖P_D P_C P_D − P_{C∩D}‖^k`
/// 5. `‖(P_D P_C P_D)^k − P_{C∩D}‖`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormChain {
    pub k: usize,
    pub values: [f64; 6],
}

impl NormChain {
    /// Absolute differences of adjacent members.
    pub fn residuals(&self) -> [f64; 5] {
        std::array::from_fn(|i| (self.values[i] - self.values[i + 1]).abs())
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals().into_iter().fold(0.0, f64::max)
    }
}

/// The `k`-independent ingredients of the chain, each computed along its own
/// path so agreement is evidence rather than tautology.
#[derive(Debug, Clone)]
pub struct NormChainEvaluator {
    iteration: Matrix,
    limit: Matrix,
    single_step: f64,
    friedrichs_rate: f64,
    cos_cd: f64,
    sandwich: Matrix,
    product_limit: Matrix,
    sandwich_single_step: f64,
}

impl NormChainEvaluator {
    pub fn new(list: &[Subspace]) -> Result<Self> {
        let model = build_product(list)?;
        let r = list.len() as f64;
        let friedrichs = friedrichs_gram(list)?;
        if friedrichs.degenerate {
            return Err(Error::Degenerate(
                "every subspace equals the intersection; all chain members are 0 \
                 and the chain holds trivially"
                    .into(),
            ));
        }
        let op = simultaneous_operator(list)?;
        let iteration = op.matrix().clone();
        let limit = op.limit_projector().matrix().clone();
        let single_step = numlin::sigma_max(&(&iteration - &limit));

        let sandwich = model.sandwich_operator();
        let product_limit = model.c_cap_d()?.projector().into_matrix();
        let sandwich_single_step = numlin::sigma_max(&(&sandwich - &product_limit));

        Ok(NormChainEvaluator {
            iteration,
            limit,
            single_step,
            friedrichs_rate: (r - 1.0) / r * friedrichs.value + 1.0 / r,
            cos_cd: model.cos_cd()?.value,
            sandwich,
            product_limit,
            sandwich_single_step,
        })
    }

    pub fn at(&self, k: usize) -> Result<NormChain> {
        if k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        let ki = k as i32;
        let direct =
            numlin::sigma_max(&(numlin::matrix_power_naive(&self.iteration, k) - &self.limit));
        let product_direct = numlin::sigma_max(
            &(numlin::matrix_power_naive(&self.sandwich, k) - &self.product_limit),
        );
        Ok(NormChain {
            k,
            values: [
                direct,
                self.single_step.powi(ki),
                self.friedrichs_rate.powi(ki),
                self.cos_cd.powi(2 * ki),
                self.sandwich_single_step.powi(ki),
                product_direct,
            ],
        })
    }
}

/// All six chain members at step `k`; fails on degenerate instances.
pub fn verify_norm_chain(list: &[Subspace], k: usize) -> Result<NormChain> {
    NormChainEvaluator::new(list)?.at(k)
}

/// `‖(P_D P_C)^k (x,…,x) − (T^k x,…,T^k x)‖ + ‖P_{C∩D}(x,…,x) − (P_M x,…,P_M x)‖`.
pub fn verify_pierra_lift(list: &[Subspace], x: &Vector, k: usize) -> Result<f64> {
    Ok(pierra_lift_residuals(list, x, k)?[k])
}

/// [`verify_pierra_lift`] for every `k = 0..=k_max` along one trajectory.
pub fn pierra_lift_residuals(list: &[Subspace], x: &Vector, k_max: usize) -> Result<Vec<f64>> {
    let model = build_product(list)?;
    let lifted = model.lift_diag(x)?;
    let op = simultaneous_operator(list)?;

    let product_limit = model.c_cap_d()?.projector().into_matrix();
    let limit_gap =
        (product_limit * &lifted - model.lift_diag(&(op.limit_projector().matrix() * x))?).norm();

    let alternating = model.alternating_operator();
    let mut y = lifted;
    let mut base = x.clone();
    let mut out = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        if k > 0 {
            y = &alternating * y;
            base = op.matrix() * base;
        }
        out.push((&y - model.lift_diag(&base)?).norm() + limit_gap);
    }
    Ok(out)
}

/// Run `(P_D P_C)^k` on the lifted start inside the product space.
///
/// Errors are reported in the averaged norm, `‖y_k − P_{C∩D} y_0‖ / √r`, so
/// they are directly comparable with the base-space simultaneous iteration;
/// `bounds[k] = q^k ‖x‖` with the optimal simultaneous rate `q`.
pub fn product_alternating_trace(
    list: &[Subspace],
    x: &Vector,
    k_max: usize,
) -> Result<IterationTrace> {
    let model = build_product(list)?;
    let lifted = model.lift_diag(x)?;
    let rate = simultaneous_rate(list)?;
    let alternating = model.alternating_operator();
    let limit = model.c_cap_d()?.projector().into_matrix() * &lifted;
    let scale = (list.len() as f64).sqrt();
    let mut y = lifted;
    let mut errors = Vec::with_capacity(k_max + 1);
    let mut bounds = Vec::with_capacity(k_max + 1);
    let mut factor = 1.0;
    for k in 0..=k_max {
        if k > 0 {
            y = &alternating * y;
            factor *= rate;
        }
        errors.push((&y - &limit).norm() / scale);
        bounds.push(factor * x.norm());
    }
    Ok(IterationTrace {
        start: x.iter().copied().collect(),
        errors,
        bounds,
    })
}
