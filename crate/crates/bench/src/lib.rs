//! Fixed-size inputs for the benchmarks.

use projrate::experiment::generate::{random_subspace, random_unit_vector, rng_for};
use projrate::{Subspace, Vector};

/// `r` random subspaces of dimension `n / 2` in `R^n`.
pub fn subspaces(r: usize, n: usize, seed: u64) -> Vec<Subspace> {
    let mut rng = rng_for(seed, 0);
    (0..r).map(|_| random_subspace(n, n / 2, &mut rng)).collect()
}

pub fn start(n: usize, seed: u64) -> Vector {
    random_unit_vector(n, &mut rng_for(seed, 1))
}
