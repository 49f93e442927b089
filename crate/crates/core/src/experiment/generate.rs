//! Seeded instance generators.
//!
//! Every random quantity comes from a ChaCha stream selected by
//! `(seed, stream)`, so instances generated in parallel match a serial run.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::scenario::{Check, Method, Mode, Scenario, Starts, SubspaceSpec};
use crate::error::{Error, Result};
use crate::numlin::{self, Matrix, RankTolerance, Vector};
use crate::subspace::Subspace;

/// Independent generator for one `(seed, stream)` pair.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Unit vector, uniform on the sphere.
pub fn random_unit_vector(n: usize, rng: &mut impl Rng) -> Vector {
    loop {
        let v = Vector::from_fn(n, |_, _| rng.sample(StandardNormal));
        let norm = v.norm();
        if norm > 1e-12 {
            return v / norm;
        }
    }
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with the
/// signs of `R`'s diagonal folded into `Q`).
pub fn random_orthogonal(n: usize, rng: &mut impl Rng) -> Matrix {
    let qr = gaussian_matrix(n, n, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Random `d`-dimensional subspace of `Rⁿ`.
pub fn random_subspace(n: usize, d: usize, rng: &mut impl Rng) -> Subspace {
    if d == 0 {
        return Subspace::trivial(n);
    }
    let basis = numlin::orthonormal_basis(&gaussian_matrix(n, d, rng), RankTolerance::default())
        .expect("Gaussian matrices are finite");
    Subspace::from_orthonormal(basis).expect("SVD factors are orthonormal")
}

fn spec_from_subspace(s: &Subspace) -> SubspaceSpec {
    SubspaceSpec {
        vectors: s
            .basis()
            .column_iter()
            .map(|c| c.iter().copied().collect())
            .collect(),
        anchor: None,
    }
}

/// Checks that apply to `r` subspaces.
pub fn applicable_checks(r: usize) -> Vec<Check> {
    Check::ALL
        .into_iter()
        .filter(|c| {
            if c.needs_pair() {
                r == 2
            } else if matches!(c, Check::NormChain | Check::PierraLift) {
                r >= 2
            } else {
                true
            }
        })
        .collect()
}

const DEFAULT_K_MAX: usize = 10;
const DEFAULT_STARTS: usize = 4;

/// Two subspaces of dimension `s + 1` sharing an `s`-dimensional part, whose
/// reduced components meet at `theta_deg`, conjugated by a seeded rotation.
pub fn generate_two_subspace(
    theta_deg: f64,
    ambient_dim: usize,
    shared_dim: usize,
    seed: u64,
) -> Result<Scenario> {
    if !(theta_deg > 0.0 && theta_deg <= 90.0) {
        return Err(Error::invalid(format!(
            "theta must lie in (0, 90] degrees, got {theta_deg}"
        )));
    }
    if ambient_dim < shared_dim + 2 {
        return Err(Error::invalid(format!(
            "ambient_dim must be at least shared_dim + 2 = {}, got {ambient_dim}",
            shared_dim + 2
        )));
    }
    let n = ambient_dim;
    let s = shared_dim;
    let theta = theta_deg.to_radians();
    let mut first = Matrix::zeros(n, s + 1);
    let mut second = Matrix::zeros(n, s + 1);
    for j in 0..s {
        first[(j, j)] = 1.0;
        second[(j, j)] = 1.0;
    }
    first[(s, s)] = 1.0;
    second[(s, s)] = theta.cos();
    second[(s + 1, s)] = theta.sin();

    let mut rng = rng_for(seed, 0);
    let rotation = random_orthogonal(n, &mut rng);
    let subspaces = [first, second].map(|b| {
        Subspace::from_orthonormal(b)
            .and_then(|sub| sub.rotated(&rotation))
            .expect("planted bases are orthonormal")
    });
    Ok(Scenario {
        name: format!("two-subspace-theta{theta_deg}-n{n}-s{s}-seed{seed}"),
        ambient_dim: n,
        mode: Mode::Linear,
        subspaces: subspaces.iter().map(spec_from_subspace).collect(),
        method: Method::Simultaneous,
        k_max: DEFAULT_K_MAX,
        starts: Starts::Random {
            count: DEFAULT_STARTS,
            seed,
        },
        checks: applicable_checks(2),
    })
}

/// `r` random subspaces of the given dimensions.
pub fn generate_random(r: usize, ambient_dim: usize, dims: &[usize], seed: u64) -> Result<Scenario> {
    if r < 2 {
        return Err(Error::invalid(format!("r must be at least 2, got {r}")));
    }
    if ambient_dim == 0 {
        return Err(Error::invalid("ambient_dim must be at least 1"));
    }
    if dims.len() != r {
        return Err(Error::invalid(format!(
            "expected {r} dimensions, got {}",
            dims.len()
        )));
    }
    if let Some(d) = dims.iter().find(|&&d| d > ambient_dim) {
        return Err(Error::invalid(format!(
            "subspace dimension {d} exceeds ambient_dim {ambient_dim}"
        )));
    }
    let subspaces: Vec<Subspace> = dims
        .iter()
        .enumerate()
        .map(|(i, &d)| random_subspace(ambient_dim, d, &mut rng_for(seed, i as u64)))
        .collect();
    let dims_label: Vec<String> = dims.iter().map(usize::to_string).collect();
    Ok(Scenario {
        name: format!(
            "random-r{r}-n{ambient_dim}-d{}-seed{seed}",
            dims_label.join("x")
        ),
        ambient_dim,
        mode: Mode::Linear,
        subspaces: subspaces.iter().map(spec_from_subspace).collect(),
        method: Method::Simultaneous,
        k_max: DEFAULT_K_MAX,
        starts: Starts::Random {
            count: DEFAULT_STARTS,
            seed,
        },
        checks: applicable_checks(r),
    })
}

/// Shape of one random instance used by the verification suite.
#[derive(Debug, Clone)]
pub struct RandomInstance {
    pub subspaces: Vec<Subspace>,
    /// Dimension of the common part planted before adding random directions.
    pub planted_shared: usize,
}

/// Random non-degenerate instance: `2 ≤ r ≤ max_r`, `2 ≤ n ≤ max_n`, every
/// subspace proper and non-trivial. Half the instances plant a common
/// subspace so that `M = ∩M_i` is non-trivial.
pub fn random_instance(rng: &mut impl Rng, max_r: usize, max_n: usize) -> RandomInstance {
    let r = rng.random_range(2..=max_r.max(2));
    let n = rng.random_range(2..=max_n.max(2));
    let plant = n >= 4 && rng.random_bool(0.5);
    if !plant {
        let subspaces = (0..r)
            .map(|_| {
                let d = rng.random_range(1..n);
                random_subspace(n, d, rng)
            })
            .collect();
        return RandomInstance {
            subspaces,
            planted_shared: 0,
        };
    }
    let s = rng.random_range(1..=n / 3);
    let frame = random_orthogonal(n, rng);
    let shared = frame.columns(0, s).into_owned();
    let rest = frame.columns(s, n - s).into_owned();
    let subspaces = (0..r)
        .map(|_| {
            // Extra directions live in the complement of the shared part.
            let extra = rng.random_range(1..(n - s));
            let coeffs = gaussian_matrix(n - s, extra, rng);
            let mut span = Matrix::zeros(n, s + extra);
            span.columns_mut(0, s).copy_from(&shared);
            span.columns_mut(s, extra).copy_from(&(&rest * coeffs));
            Subspace::from_spanning(&span, RankTolerance::default())
                .expect("generated spanning sets are finite")
        })
        .collect();
    RandomInstance {
        subspaces,
        planted_shared: s,
    }
}
