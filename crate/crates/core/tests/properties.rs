//! Randomized invariants across the library.

use proptest::prelude::*;

use projrate::experiment::generate::{
    random_instance, random_orthogonal, random_subspace, random_unit_vector, rng_for,
};
use projrate::experiment::{generate_random, generate_two_subspace, parse_scenario};
use projrate::numlin::{matrix_power, matrix_power_naive, null_space, orthonormal_basis, spectral_norm};
use projrate::projmethods::simultaneous_rate;
use projrate::{
    build_product, cos_two, cyclic_bound, cyclic_operator, friedrichs_from_norm, friedrichs_gram,
    intersection, intersection_affine, iterate, kw_bound, optimal_bound_simultaneous,
    project_affine, reduced_component, simultaneous_affine, simultaneous_operator,
    verify_norm_chain, AffineSubspace, Matrix, RankTolerance, Subspace,
};

fn instance(seed: u64, max_r: usize, max_n: usize) -> Vec<Subspace> {
    random_instance(&mut rng_for(seed, 0), max_r, max_n).subspaces
}

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(48)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn basis_is_orthonormal_and_spans(rows in 1usize..9, cols in 0usize..9, rank in 0usize..9, seed: u64) {
        let mut rng = rng_for(seed, 0);
        let rank = rank.min(rows).min(cols);
        let left = projrate::experiment::generate::gaussian_matrix(rows, rank, &mut rng);
        let right = projrate::experiment::generate::gaussian_matrix(rank, cols, &mut rng);
        let a = left * right;
        let q = orthonormal_basis(&a, RankTolerance::default()).unwrap();
        prop_assert_eq!(q.ncols(), rank);
        let gram = q.transpose() * &q;
        prop_assert!((gram - Matrix::identity(rank, rank)).amax() < 1e-12);
        let reproduced = &q * (q.transpose() * &a);
        prop_assert!((reproduced - &a).amax() < 1e-10 * (1.0 + a.amax()));
        if cols > 0 {
            let kernel = null_space(&a, RankTolerance::default()).unwrap();
            prop_assert_eq!(kernel.ncols(), cols - rank);
            prop_assert!((&a * kernel).amax() < 1e-10 * (1.0 + a.amax()));
        }
    }

    #[test]
    fn spectral_norm_dominates_images(n in 1usize..8, seed: u64) {
        let mut rng = rng_for(seed, 0);
        let a = projrate::experiment::generate::gaussian_matrix(n, n, &mut rng);
        let norm = spectral_norm(&a).unwrap();
        for _ in 0..4 {
            let x = random_unit_vector(n, &mut rng);
            prop_assert!((&a * x).norm() <= norm * (1.0 + 1e-12));
        }
        let fro = a.norm();
        prop_assert!(norm <= fro * (1.0 + 1e-12));
        prop_assert!(norm * (n as f64).sqrt() >= fro * (1.0 - 1e-12));
    }

    #[test]
    fn powers_agree(n in 1usize..6, k in 0usize..12, seed: u64) {
        let a = projrate::experiment::generate::gaussian_matrix(n, n, &mut rng_for(seed, 0)) / (n as f64);
        let fast = matrix_power(&a, k);
        let slow = matrix_power_naive(&a, k);
        prop_assert!((fast - slow).amax() < 1e-10);
    }

    #[test]
    fn projectors_are_orthogonal_projections(n in 1usize..10, d in 0usize..10, seed: u64) {
        let s = random_subspace(n, d.min(n), &mut rng_for(seed, 0));
        let p = s.projector();
        prop_assert!(p.symmetry_defect() < 1e-12);
        prop_assert!(p.idempotence_defect() < 1e-12);
        prop_assert_eq!(s.dim() + s.orth_complement().dim(), n);
        let cross = s.basis().transpose() * s.orth_complement().basis();
        prop_assert!(cross.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn intersection_lies_in_every_member(seed: u64) {
        let list = instance(seed, 4, 10);
        let m = intersection(&list).unwrap();
        for s in &list {
            prop_assert!(s.contains(&m));
            let reduced = reduced_component(s, &m).unwrap();
            prop_assert_eq!(reduced.dim() + m.dim(), s.dim());
            if !m.is_trivial() && !reduced.is_trivial() {
                prop_assert!((m.basis().transpose() * reduced.basis()).amax() < 1e-10);
            }
        }
    }

    #[test]
    fn friedrichs_routes_agree(seed: u64) {
        let list = instance(seed, 5, 12);
        let gram = friedrichs_gram(&list).unwrap();
        prop_assume!(!gram.degenerate);
        prop_assert!(gram.raw < 1.0 - 1e-12);
        let norm = friedrichs_from_norm(&list).unwrap();
        prop_assert!((norm.raw - gram.raw).abs() <= 1e-9);
        if list.len() == 2 {
            prop_assert!((cos_two(&list[0], &list[1]).unwrap().raw - gram.raw).abs() <= 1e-9);
        }
    }

    #[test]
    fn friedrichs_is_rotation_invariant(seed: u64) {
        let list = instance(seed, 4, 10);
        let q = random_orthogonal(list[0].ambient_dim(), &mut rng_for(seed, 1));
        let rotated: Vec<Subspace> = list.iter().map(|s| s.rotated(&q).unwrap()).collect();
        let a = friedrichs_gram(&list).unwrap();
        let b = friedrichs_gram(&rotated).unwrap();
        prop_assert_eq!(a.degenerate, b.degenerate);
        prop_assert!((a.value - b.value).abs() <= 1e-9);
    }

    #[test]
    fn simultaneous_norm_is_a_power(seed: u64) {
        let list = instance(seed, 5, 10);
        let op = simultaneous_operator(&list).unwrap();
        prop_assert!(op.absorption_defect() < 1e-10);
        let single = op.error_operator_norm(1).unwrap();
        for k in 1..=20 {
            let norm = op.error_operator_norm(k).unwrap();
            prop_assert!((norm - single.powi(k as i32)).abs() <= 1e-9);
            prop_assert!((norm - optimal_bound_simultaneous(&list, k).unwrap()).abs() <= 1e-9);
        }
    }

    #[test]
    fn alternating_pair_norm_is_exact(seed: u64) {
        let list = instance(seed, 2, 12);
        let op = cyclic_operator(&list).unwrap();
        for k in 1..=10 {
            let exact = op.error_operator_norm(k).unwrap();
            prop_assert!((exact - kw_bound(&list[0], &list[1], k).unwrap()).abs() <= 1e-9);
        }
        // The sweep bound meets the exact norm at one sweep only.
        let one = op.error_operator_norm(1).unwrap();
        prop_assert!((one - cyclic_bound(&list, 1).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn cyclic_bound_is_valid(seed: u64) {
        let list = instance(seed, 5, 10);
        let op = cyclic_operator(&list).unwrap();
        for k in 1..=10 {
            prop_assert!(op.error_operator_norm(k).unwrap() <= cyclic_bound(&list, k).unwrap() + 1e-9);
        }
    }

    #[test]
    fn trajectories_respect_the_optimal_bound(seed: u64) {
        let list = instance(seed, 5, 12);
        let op = simultaneous_operator(&list).unwrap();
        let x = random_unit_vector(op.ambient_dim(), &mut rng_for(seed, 2));
        let t = iterate(&op, &x, 10).unwrap();
        for k in 1..=10 {
            prop_assert!(t.errors[k] <= optimal_bound_simultaneous(&list, k).unwrap() + 1e-10);
            prop_assert!(t.errors[k] <= t.errors[k - 1] + 1e-12);
        }
    }

    #[test]
    fn product_space_dimensions(seed: u64) {
        let list = instance(seed, 4, 8);
        let model = build_product(&list).unwrap();
        let n = list[0].ambient_dim();
        prop_assert_eq!(model.c().dim(), list.iter().map(Subspace::dim).sum::<usize>());
        prop_assert_eq!(model.d().dim(), n);
        prop_assert_eq!(model.c_cap_d().unwrap().dim(), intersection(&list).unwrap().dim());
        let cos_cd = model.cos_cd().unwrap().value;
        let q = simultaneous_rate(&list).unwrap();
        if !friedrichs_gram(&list).unwrap().degenerate {
            prop_assert!((cos_cd * cos_cd - q).abs() <= 1e-9);
            let chain = verify_norm_chain(&list, 3).unwrap();
            prop_assert!(chain.max_residual() <= 1e-8);
        }
    }

    #[test]
    fn affine_projection_is_nearest(n in 2usize..8, seed: u64) {
        let mut rng = rng_for(seed, 0);
        let d = 1 + (seed as usize) % (n - 1);
        let dir = random_subspace(n, d, &mut rng);
        let v = AffineSubspace::new(&(random_unit_vector(n, &mut rng) * 4.0), dir).unwrap();
        prop_assert!(v.direction().project(v.anchor()).unwrap().norm() <= 1e-10);
        prop_assert!(v.contains(v.anchor()).unwrap());
        let x = random_unit_vector(n, &mut rng) * 3.0;
        let p = project_affine(&v, &x).unwrap();
        prop_assert!(v.contains(&p).unwrap());
        for _ in 0..5 {
            let y = v.anchor() + v.direction().project(&(random_unit_vector(n, &mut rng) * 5.0)).unwrap();
            prop_assert!((&x - &p).norm() <= (&x - y).norm() + 1e-10);
        }
    }

    #[test]
    fn affine_iteration_is_translated_linear(seed: u64) {
        let mut rng = rng_for(seed, 0);
        let dirs = random_instance(&mut rng, 4, 8).subspaces;
        let n = dirs[0].ambient_dim();
        let p = random_unit_vector(n, &mut rng) * 2.0;
        let list: Vec<AffineSubspace> = dirs
            .iter()
            .map(|d| AffineSubspace::new(&p, d.clone()).unwrap())
            .collect();
        let v = intersection_affine(&list).unwrap();
        let x0 = random_unit_vector(n, &mut rng) * 3.0;
        let a = simultaneous_affine(&list, &x0, 8).unwrap();
        let l = iterate(&simultaneous_operator(&dirs).unwrap(), &(&x0 - v.anchor()), 8).unwrap();
        for k in 0..=8 {
            prop_assert!((a.errors[k] - l.errors[k]).abs() <= 1e-10);
            prop_assert!(a.errors[k] <= a.bounds[k] + 1e-10);
        }
    }

    #[test]
    fn generated_scenarios_round_trip(r in 2usize..5, n in 2usize..7, seed: u64) {
        let dims: Vec<usize> = (0..r).map(|i| 1 + (i + seed as usize) % n).collect();
        let s = generate_random(r, n, &dims, seed).unwrap();
        let back = parse_scenario(&s.to_text()).unwrap();
        prop_assert_eq!(back, s);
    }
}

#[test]
fn planted_angles_are_recovered() {
    for step in 1..=18 {
        let theta = 5.0 * step as f64;
        for (n, shared) in [(2, 0), (6, 2), (12, 5)] {
            let s = generate_two_subspace(theta, n, shared, step as u64).unwrap();
            let list = s.linear_subspaces().unwrap();
            let cos = cos_two(&list[0], &list[1]).unwrap().value;
            assert!(
                (cos - theta.to_radians().cos()).abs() <= 1e-9,
                "theta {theta}, n {n}, s {shared}: cos {cos}"
            );
            assert_eq!(intersection(&list).unwrap().dim(), shared);
        }
    }
}
