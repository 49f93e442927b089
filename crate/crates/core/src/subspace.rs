//! Closed linear subspaces of `Rⁿ` and their orthogonal projectors.

use crate::error::{Error, Result};
use crate::numlin::{self, Matrix, RankTolerance, Vector};
use crate::tolerances::CONTAINMENT;

/// A linear subspace stored as an orthonormal basis (`n × d`, `d` may be 0).
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: Matrix,
}

/// The matrix of a metric projection onto a subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorOp {
    matrix: Matrix,
}

impl Subspace {
    /// Span of the columns of `vectors` (`n × m`).
    pub fn from_spanning(vectors: &Matrix, tol: RankTolerance) -> Result<Self> {
        let n = vectors.nrows();
        numlin::ensure_finite(vectors)?;
        if n == 0 {
            return Err(Error::invalid("subspace ambient dimension must be positive"));
        }
        if vectors.ncols() == 0 || vectors.iter().all(|&v| v == 0.0) {
            return Ok(Subspace::trivial(n));
        }
        Ok(Subspace {
            basis: numlin::orthonormal_basis(vectors, tol)?,
        })
    }

    /// Wrap a matrix whose columns are already orthonormal.
    pub fn from_orthonormal(basis: Matrix) -> Result<Self> {
        numlin::ensure_finite(&basis)?;
        if basis.nrows() == 0 {
            return Err(Error::invalid("subspace ambient dimension must be positive"));
        }
        let d = basis.ncols();
        let gram_err = (basis.transpose() * &basis - Matrix::identity(d, d)).amax();
        if gram_err > 1e-10 {
            return Err(Error::invalid(format!(
                "basis columns are not orthonormal (deviation {gram_err:e})"
            )));
        }
        Ok(Subspace { basis })
    }

    pub fn trivial(ambient_dim: usize) -> Self {
        Subspace {
            basis: Matrix::zeros(ambient_dim, 0),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Subspace {
            basis: Matrix::identity(ambient_dim, ambient_dim),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn is_trivial(&self) -> bool {
        self.dim() == 0
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn projector(&self) -> ProjectorOp {
        ProjectorOp {
            matrix: &self.basis * self.basis.transpose(),
        }
    }

    /// Nearest point of the subspace to `x`.
    pub fn project(&self, x: &Vector) -> Result<Vector> {
        check_dim(self.ambient_dim(), x.len())?;
        Ok(&self.basis * (self.basis.transpose() * x))
    }

    pub fn orth_complement(&self) -> Subspace {
        let n = self.ambient_dim();
        if self.is_trivial() {
            return Subspace::full(n);
        }
        let basis = numlin::null_space(&self.basis.transpose(), RankTolerance::default())
            .expect("basis is finite and has n >= 1 columns after transposition");
        Subspace { basis }
    }

    /// `‖(I − P_self) P_other‖`, zero exactly when `other ⊆ self`.
    pub fn containment_residual(&self, other: &Subspace) -> f64 {
        if other.is_trivial() {
            return 0.0;
        }
        let inside = &self.basis * (self.basis.transpose() * &other.basis);
        numlin::sigma_max(&(&other.basis - inside))
    }

    pub fn contains(&self, other: &Subspace) -> bool {
        self.containment_residual(other) <= CONTAINMENT
    }

    /// Projector-level distance `‖P_self − P_other‖`.
    pub fn distance(&self, other: &Subspace) -> Result<f64> {
        check_dim(self.ambient_dim(), other.ambient_dim())?;
        Ok(numlin::sigma_max(
            &(self.projector().matrix - other.projector().matrix),
        ))
    }

    /// Image under an orthogonal map `q`.
    pub fn rotated(&self, q: &Matrix) -> Result<Subspace> {
        check_dim(self.ambient_dim(), q.ncols())?;
        Subspace::from_orthonormal(q * &self.basis)
    }
}

impl ProjectorOp {
    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Largest entrywise asymmetry `|P − Pᵀ|`.
    pub fn symmetry_defect(&self) -> f64 {
        (&self.matrix - self.matrix.transpose()).amax()
    }

    /// `‖P² − P‖`.
    pub fn idempotence_defect(&self) -> f64 {
        numlin::sigma_max(&(&self.matrix * &self.matrix - &self.matrix))
    }

    pub fn norm(&self) -> f64 {
        numlin::sigma_max(&self.matrix)
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

pub(crate) fn common_ambient_dim(list: &[Subspace]) -> Result<usize> {
    let first = list
        .first()
        .ok_or_else(|| Error::invalid("expected at least one subspace"))?;
    let n = first.ambient_dim();
    for s in &list[1..] {
        check_dim(n, s.ambient_dim())?;
    }
    Ok(n)
}

/// `{x : P_i x = x for all i}`, the kernel of the stacked `(I − P_i)`.
pub fn intersection(list: &[Subspace]) -> Result<Subspace> {
    let n = common_ambient_dim(list)?;
    if list.len() == 1 {
        return Ok(list[0].clone());
    }
    if list.iter().any(Subspace::is_trivial) {
        return Ok(Subspace::trivial(n));
    }
    let identity = Matrix::identity(n, n);
    let mut stacked = Matrix::zeros(n * list.len(), n);
    for (i, s) in list.iter().enumerate() {
        stacked
            .rows_mut(i * n, n)
            .copy_from(&(&identity - s.projector().matrix));
    }
    let basis = numlin::null_space(&stacked, RankTolerance::default())?;
    Ok(Subspace { basis })
}

/// `mi ∩ m^⊥` for `m ⊆ mi`.
pub fn reduced_component(mi: &Subspace, m: &Subspace) -> Result<Subspace> {
    check_dim(mi.ambient_dim(), m.ambient_dim())?;
    let residual = mi.containment_residual(m);
    if residual > CONTAINMENT {
        return Err(Error::Precondition(format!(
            "intersection is not contained in the subspace (residual {residual:e})"
        )));
    }
    if m.is_trivial() || mi.is_trivial() {
        return Ok(mi.clone());
    }
    // For m ⊆ mi, (I − P_m) maps mi onto mi ∩ m^⊥.
    let deflated = &mi.basis - &m.basis * (m.basis.transpose() * &mi.basis);
    Subspace::from_spanning(&deflated, RankTolerance::default())
}

/// Reduced components `M_i ∩ M^⊥` of every member, with `M = ∩ M_i`.
pub fn reduced_components(list: &[Subspace]) -> Result<(Subspace, Vec<Subspace>)> {
    let m = intersection(list)?;
    let reduced = list
        .iter()
        .map(|mi| reduced_component(mi, &m))
        .collect::<Result<Vec<_>>>()?;
    Ok((m, reduced))
}
