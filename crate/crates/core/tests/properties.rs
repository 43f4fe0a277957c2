//! Randomized properties across module boundaries.

use acos_core::algorithms::{run, AcosMode, AlgorithmSpec, Family};
use acos_core::benchmarks::{catalog_entry, random_rotation, shift_rotate, BaseFunction, CATALOG};
use acos_core::linalg::{eigen_transform, symmetric_eigendecompose, OrthonormalBasis, SquareMatrix};
use acos_core::selector::{reward, update_probability, CoordinateSystem, OutcomeRecord, SelectorParams};
use acos_core::{Objective, RunRng};
use proptest::prelude::*;
use rand::SeedableRng;

fn symmetric(n: usize, data: &[f64]) -> SquareMatrix {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] = data[i * n + j] + data[j * n + i];
        }
    }
    SquareMatrix::from_row_major(n, m).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn eigendecomposition_reconstructs(n in 1usize..8, data in prop::collection::vec(-10.0f64..10.0, 64)) {
        let c = symmetric(n, &data[..n * n]);
        let eig = symmetric_eigendecompose(&c).unwrap();
        prop_assert!(eig.basis.orthonormality_error() <= 1e-10);
        prop_assert!(eig.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        // Reconstruction from the raw spectrum: B·diag(λ)·Bᵀ.
        let b = eig.basis.matrix();
        for i in 0..n {
            for j in 0..n {
                let v: f64 = (0..n).map(|k| b[(i, k)] * eig.eigenvalues[k] * b[(j, k)]).sum();
                prop_assert!((v - c[(i, j)]).abs() <= 1e-9 * (1.0 + c.max_abs()));
            }
        }
    }

    #[test]
    fn eigen_transform_is_linear(seed in any::<u64>(), a in -3.0f64..3.0, d in 1usize..9) {
        let mut rng = RunRng::seed_from_u64(seed);
        let q = random_rotation(d, &mut rng).unwrap();
        let w: Vec<f64> = (0..d).map(|k| (k % 2) as f64).collect();
        let x: Vec<f64> = (0..d).map(|k| k as f64 - 1.5).collect();
        let y: Vec<f64> = (0..d).map(|k| 0.5 * k as f64).collect();
        let sum: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + q).collect();
        let lhs = eigen_transform(&w, &q, &sum).unwrap();
        let tx = eigen_transform(&w, &q, &x).unwrap();
        let ty = eigen_transform(&w, &q, &y).unwrap();
        for k in 0..d {
            prop_assert!((lhs[k] - (a * tx[k] + ty[k])).abs() < 1e-12);
        }
    }

    #[test]
    fn rotated_problem_matches_base(seed in any::<u64>(), d in 1usize..8) {
        let mut rng = RunRng::seed_from_u64(seed);
        let q = random_rotation(d, &mut rng).unwrap();
        let shift: Vec<f64> = (0..d).map(|k| k as f64 * 3.0 - 7.0).collect();
        let problem = shift_rotate("p", BaseFunction::Elliptic, shift.clone(), q.clone()).unwrap();
        let y: Vec<f64> = (0..d).map(|k| (k as f64).sin() * 5.0).collect();
        let x: Vec<f64> = q.to_original(&y).unwrap().iter().zip(&shift).map(|(a, b)| a + b).collect();
        let want = BaseFunction::Elliptic.evaluate(&y);
        prop_assert!((problem.evaluate(&x) - want).abs() <= 1e-9 * (1.0 + want));
        prop_assert_eq!(problem.evaluate(&shift), 0.0);
    }

    #[test]
    fn selector_update_moves_as_designed(p in 0.0f64..=1.0, eps in 0.01f64..1.0, eta in 0.01f64..0.99) {
        let params = SelectorParams::new(eps, eta).unwrap();
        let r = reward(p, eps).unwrap();
        let eb = update_probability(p, OutcomeRecord { system: CoordinateSystem::Eigen, improved: true }, params);
        let ew = update_probability(p, OutcomeRecord { system: CoordinateSystem::Eigen, improved: false }, params);
        prop_assert!((eb - p - r).abs() < 1e-15);
        prop_assert!((p - ew - eta * r).abs() < 1e-15);
        prop_assert!(eb <= 1.0);
    }
}

#[test]
fn every_catalog_entry_has_zero_at_shift() {
    let mut rng = RunRng::seed_from_u64(4);
    for entry in CATALOG {
        for d in [entry.min_dim(), 2, 10] {
            let p = entry.instantiate(d.max(entry.min_dim()), &mut rng).unwrap();
            let at = p.evaluate(&p.shift);
            assert!(at.abs() <= 1e-12, "{} d={d}: {at}", entry.name);
            assert!(p.bounds().contains(&p.shift));
        }
    }
}

#[test]
fn every_family_and_mode_runs_on_every_function() {
    let modes = [
        AcosMode::Adaptive,
        AcosMode::NoArchive,
        AcosMode::FixedP(0.5),
        AcosMode::Baseline,
    ];
    let mut rng = RunRng::seed_from_u64(5);
    for entry in CATALOG {
        let problem = entry.instantiate(4.max(entry.min_dim()), &mut rng).unwrap();
        for family in [
            Family::PsoW,
            Family::PsoCf,
            Family::Jde,
            Family::Sade,
            Family::Jade,
        ] {
            for mode in modes {
                let spec = AlgorithmSpec::new(family, problem.dim()).with_np(12);
                let r = run(spec, mode, &problem, 600, 1).unwrap();
                assert_eq!(r.fes_used, 600);
                assert!(
                    problem.bounds().contains(&r.best_position),
                    "{} {}",
                    entry.name,
                    family.name()
                );
                assert_eq!(problem.evaluate(&r.best_position), r.best_fitness);
            }
        }
    }
}

#[test]
fn eigen_frame_helps_on_rotated_ellipsoid() {
    // Pure Eigen-frame crossover against pure original-frame crossover on a
    // rotated ill-conditioned function, with jDE.
    let mut rng = RunRng::seed_from_u64(6);
    let problem = catalog_entry("rot_elliptic")
        .unwrap()
        .instantiate(10, &mut rng)
        .unwrap();
    let spec = AlgorithmSpec::new(Family::Jde, 10);
    let mut eig = Vec::new();
    let mut orig = Vec::new();
    for seed in 0..5 {
        eig.push(
            run(spec, AcosMode::FixedP(1.0), &problem, 30_000, seed)
                .unwrap()
                .best_fitness,
        );
        orig.push(
            run(spec, AcosMode::FixedP(0.0), &problem, 30_000, seed)
                .unwrap()
                .best_fitness,
        );
    }
    eig.sort_by(f64::total_cmp);
    orig.sort_by(f64::total_cmp);
    assert!(eig[2] < orig[2], "{eig:?} vs {orig:?}");
}

#[test]
fn identity_basis_transform_is_elementwise() {
    let b = OrthonormalBasis::identity(4);
    let w = [0.25, 1.0, 0.0, 3.0];
    let z = [1.0, -2.0, 5.0, 0.1];
    let out = eigen_transform(&w, &b, &z).unwrap();
    for k in 0..4 {
        assert_eq!(out[k].to_bits(), (w[k] * z[k]).to_bits());
    }
}
