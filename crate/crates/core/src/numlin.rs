//! Dense linear-algebra kernel.
//!
//! Everything downstream (projectors, intersections, operator norms) is built
//! from three primitives: an orthonormal basis of a column space, an
//! orthonormal basis of a null space and the spectral norm. Rank decisions
//! use a singular-value threshold scaled to the matrix (see
//! [`RankTolerance`]). Bases are not canonicalized; compare subspaces through
//! their projectors.
//!
//! Matrices are nalgebra types; the decompositions themselves run through
//! faer, sequentially, so results do not depend on the thread pool.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::evd::{self_adjoint_evd, self_adjoint_evd_scratch, ComputeEigenvectors};
use faer::linalg::svd::{svd as faer_svd, svd_scratch, ComputeSvdVectors};
use faer::{Mat, Par};
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Threshold below which a singular value counts as zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankTolerance {
    relative_eps: f64,
    absolute_floor: f64,
}

impl Default for RankTolerance {
    fn default() -> Self {
        RankTolerance {
            relative_eps: 1e-12,
            absolute_floor: 1e-14,
        }
    }
}

impl RankTolerance {
    pub fn new(relative_eps: f64, absolute_floor: f64) -> Result<Self> {
        if !(relative_eps > 0.0 && absolute_floor > 0.0)
            || !relative_eps.is_finite()
            || !absolute_floor.is_finite()
        {
            return Err(Error::invalid(
                "rank tolerance parameters must be finite and strictly positive",
            ));
        }
        Ok(RankTolerance {
            relative_eps,
            absolute_floor,
        })
    }

    pub fn relative_eps(&self) -> f64 {
        self.relative_eps
    }

    pub fn absolute_floor(&self) -> f64 {
        self.absolute_floor
    }

    /// `max(rows, cols) · relative_eps · σ_max`, floored at `absolute_floor`.
    pub fn threshold(&self, rows: usize, cols: usize, sigma_max: f64) -> f64 {
        let scaled = rows.max(cols) as f64 * self.relative_eps * sigma_max;
        scaled.max(self.absolute_floor)
    }
}

pub(crate) fn ensure_finite(a: &Matrix) -> Result<()> {
    if a.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub(crate) fn ensure_finite_vec(x: &Vector) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Full singular value decomposition `a = U Σ Vᵀ` with `U` (m × m) and
/// `V` (n × n) when requested; `sigma` is non-increasing.
pub(crate) struct Svd {
    pub sigma: Vec<f64>,
    pub u: Option<Matrix>,
    pub v: Option<Matrix>,
}

fn to_faer(a: &Matrix) -> Mat<f64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

fn from_faer(a: &Mat<f64>) -> Matrix {
    Matrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

pub(crate) fn svd(a: &Matrix, want_u: bool, want_v: bool) -> Result<Svd> {
    let (m, n) = a.shape();
    let size = m.min(n);
    let mode = |want| {
        if want {
            ComputeSvdVectors::Full
        } else {
            ComputeSvdVectors::No
        }
    };
    let mut s = faer::diag::Diag::<f64>::zeros(size);
    let mut u = want_u.then(|| Mat::<f64>::zeros(m, m));
    let mut v = want_v.then(|| Mat::<f64>::zeros(n, n));
    let mut buf = MemBuffer::new(svd_scratch::<f64>(
        m,
        n,
        mode(want_u),
        mode(want_v),
        Par::Seq,
        Default::default(),
    ));
    faer_svd(
        to_faer(a).as_ref(),
        s.as_mut(),
        u.as_mut().map(|u| u.as_mut()),
        v.as_mut().map(|v| v.as_mut()),
        Par::Seq,
        MemStack::new(&mut buf),
        Default::default(),
    )
    .map_err(|e| Error::Degenerate(format!("singular value decomposition failed: {e:?}")))?;
    Ok(Svd {
        sigma: s.column_vector().iter().copied().collect(),
        u: u.as_ref().map(from_faer),
        v: v.as_ref().map(from_faer),
    })
}

fn numerical_rank(sigma: &[f64], rows: usize, cols: usize, tol: RankTolerance) -> usize {
    let top = sigma.first().copied().unwrap_or(0.0);
    let threshold = tol.threshold(rows, cols, top);
    sigma.iter().take_while(|&&s| s > threshold).count()
}

/// Orthonormal basis of the column space of `a`.
///
/// The number of returned columns is the numerical rank of `a` under `tol`.
pub fn orthonormal_basis(a: &Matrix, tol: RankTolerance) -> Result<Matrix> {
    if a.nrows() == 0 {
        return Err(Error::invalid("orthonormal_basis needs at least one row"));
    }
    ensure_finite(a)?;
    let (rows, cols) = a.shape();
    if cols == 0 {
        return Ok(Matrix::zeros(rows, 0));
    }
    let d = svd(a, true, false)?;
    let rank = numerical_rank(&d.sigma, rows, cols, tol);
    let u = d.u.expect("left singular vectors were requested");
    Ok(u.columns(0, rank).into_owned())
}

/// Orthonormal basis of `{x : a x = 0}`; zero columns when the kernel is trivial.
pub fn null_space(a: &Matrix, tol: RankTolerance) -> Result<Matrix> {
    let (rows, cols) = a.shape();
    if cols == 0 {
        return Err(Error::invalid("null_space needs at least one column"));
    }
    ensure_finite(a)?;
    if rows == 0 {
        return Ok(Matrix::identity(cols, cols));
    }
    let d = svd(a, false, true)?;
    let rank = numerical_rank(&d.sigma, rows, cols, tol);
    let v = d.v.expect("right singular vectors were requested");
    Ok(v.columns(rank, cols - rank).into_owned())
}

/// Least-norm least-squares solution of `a x = b`, with singular values at
/// or below the `tol` threshold treated as zero.
pub fn least_squares(a: &Matrix, b: &Vector, tol: RankTolerance) -> Result<Vector> {
    let (rows, cols) = a.shape();
    if b.len() != rows {
        return Err(Error::DimensionMismatch {
            expected: rows,
            found: b.len(),
        });
    }
    ensure_finite(a)?;
    ensure_finite_vec(b)?;
    if rows == 0 || cols == 0 {
        return Ok(Vector::zeros(cols));
    }
    let d = svd(a, true, true)?;
    let rank = numerical_rank(&d.sigma, rows, cols, tol);
    let u = d.u.expect("left singular vectors were requested");
    let v = d.v.expect("right singular vectors were requested");
    let mut x = Vector::zeros(cols);
    for j in 0..rank {
        let coeff = u.column(j).dot(b) / d.sigma[j];
        x += v.column(j) * coeff;
    }
    Ok(x)
}

/// Largest singular value. Empty matrices have norm 0.
pub fn spectral_norm(a: &Matrix) -> Result<f64> {
    ensure_finite(a)?;
    if a.is_empty() {
        return Ok(0.0);
    }
    Ok(svd(a, false, false)?.sigma[0])
}

/// [`spectral_norm`] for matrices built from finite data inside the crate.
pub(crate) fn sigma_max(a: &Matrix) -> f64 {
    spectral_norm(a).expect("internal matrices are finite")
}

/// Largest singular value together with a unit right singular vector.
pub fn top_singular_pair(a: &Matrix) -> Result<(f64, Vector)> {
    ensure_finite(a)?;
    if a.is_empty() {
        return Err(Error::invalid("top singular pair of an empty matrix"));
    }
    let d = svd(a, false, true)?;
    let v = d.v.expect("right singular vectors were requested");
    Ok((d.sigma[0], v.column(0).into_owned()))
}

/// Largest eigenvalue of a symmetric matrix.
pub fn symmetric_max_eigenvalue(a: &Matrix) -> Result<f64> {
    ensure_finite(a)?;
    if !a.is_square() || a.is_empty() {
        return Err(Error::invalid("expected a non-empty square matrix"));
    }
    let n = a.nrows();
    let mut s = faer::diag::Diag::<f64>::zeros(n);
    let mut buf = MemBuffer::new(self_adjoint_evd_scratch::<f64>(
        n,
        ComputeEigenvectors::No,
        Par::Seq,
        Default::default(),
    ));
    self_adjoint_evd(
        to_faer(a).as_ref(),
        s.as_mut(),
        None,
        Par::Seq,
        MemStack::new(&mut buf),
        Default::default(),
    )
    .map_err(|e| Error::Degenerate(format!("eigendecomposition failed: {e:?}")))?;
    Ok(s.column_vector().iter().copied().fold(f64::NEG_INFINITY, f64::max))
}

/// `a^k` by repeated squaring. `k = 0` gives the identity.
pub fn matrix_power(a: &Matrix, mut k: usize) -> Matrix {
    let n = a.nrows();
    let mut result = Matrix::identity(n, n);
    let mut base = a.clone();
    while k > 0 {
        if k & 1 == 1 {
            result = &result * &base;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    result
}

/// `a^k` by `k − 1` successive multiplications.
pub fn matrix_power_naive(a: &Matrix, k: usize) -> Matrix {
    let n = a.nrows();
    if k == 0 {
        return Matrix::identity(n, n);
    }
    let mut result = a.clone();
    for _ in 1..k {
        result = &result * a;
    }
    result
}
