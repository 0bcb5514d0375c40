use mre_core::bayes::{bayes_update, maxent_update, DiscreteDistribution, LikelihoodModel};
use mre_core::collapse::{jeffrey_collapse, strong_collapse, weak_collapse};
use mre_core::entropy::{kl_divergence, relative_entropy, von_neumann_entropy};
use mre_core::optimize::{minimize, ConstraintSet, MinimizeOptions};
use mre_core::state::{haar_unitary, random_block_unitary_with, random_hermitian, seeded_rng};
use mre_core::*;
use proptest::prelude::*;
use rand::Rng;

fn ranks_for(dim: usize, seed: u64) -> Vec<usize> {
    let mut rng = seeded_rng(seed ^ 0x5eed);
    let blocks = rng.random_range(1..=dim);
    let mut ranks = vec![1; blocks];
    for _ in blocks..dim {
        ranks[rng.random_range(0..blocks)] += 1;
    }
    ranks
}

fn probabilities(n: usize, seed: u64) -> BlockProbabilities {
    let mut rng = seeded_rng(seed ^ 0xbeef);
    let raw: Vec<f64> = (0..n).map(|_| 0.05 + rng.random::<f64>()).collect();
    let s: f64 = raw.iter().sum();
    BlockProbabilities::new(raw.iter().map(|x| x / s).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn eig_reconstructs(dim in 1usize..=8, seed in any::<u64>()) {
        let a = random_hermitian(dim, seed);
        let eig = hermitian_eig(&a).unwrap();
        prop_assert!((&a - &eig.reconstruct()).frobenius_norm() <= 1e-10 * a.frobenius_norm().max(1.0));
        prop_assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        let v = &eig.eigenvectors;
        prop_assert!((&(&v.adjoint() * v) - &ComplexMatrix::identity(dim)).max_abs() <= 1e-10);
    }

    #[test]
    fn identity_function_is_identity(dim in 1usize..=8, seed in any::<u64>()) {
        let a = random_hermitian(dim, seed);
        let b = matrix_function(&a, |x| x, ZeroPolicy::Strict).unwrap();
        prop_assert!((&a - &b).max_abs() <= 1e-10);
    }

    #[test]
    fn trace_distance_triangle(dim in 2usize..=6, seed in any::<u64>()) {
        let a = random_density(dim, dim, seed).unwrap();
        let b = random_density(dim, dim, seed.wrapping_add(1)).unwrap();
        let c = random_density(dim, dim, seed.wrapping_add(2)).unwrap();
        let (a, b, c) = (a.matrix(), b.matrix(), c.matrix());
        let ab = trace_distance(a, b).unwrap();
        prop_assert!(ab <= trace_distance(a, c).unwrap() + trace_distance(c, b).unwrap() + 1e-12);
        prop_assert!((ab - trace_distance(b, a).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn commutator_norm_symmetric(dim in 1usize..=6, seed in any::<u64>()) {
        let a = random_hermitian(dim, seed);
        let b = random_hermitian(dim, seed.wrapping_add(7));
        prop_assert!((commutator_norm(&a, &b).unwrap() - commutator_norm(&b, &a).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn pinching_is_a_state(dim in 1usize..=8, seed in any::<u64>()) {
        let pvm = random_pvm(dim, &ranks_for(dim, seed), seed).unwrap();
        let rho = random_density(dim, 1 + (seed as usize % dim), seed).unwrap();
        let pinched = pvm.pinch(rho.matrix());
        prop_assert!((pinched.real_trace() - 1.0).abs() <= 1e-12);
        prop_assert!(pinched.is_psd(1e-12));
    }

    #[test]
    fn spectral_decompose_recovers_blocks(dim in 1usize..=8, seed in any::<u64>()) {
        let ranks = ranks_for(dim, seed);
        let pvm = random_pvm(dim, &ranks, seed).unwrap();
        let again = spectral_decompose(&pvm.observable(), 1e-8).unwrap();
        prop_assert_eq!(again.ranks(), ranks);
        for (x, y) in again.lambdas().iter().zip(pvm.lambdas()) {
            prop_assert!((x - y).abs() <= 1e-8);
        }
        for (x, y) in again.blocks().iter().zip(pvm.blocks()) {
            prop_assert!((&x.projector - &y.projector).max_abs() <= 1e-8);
        }
    }

    #[test]
    fn block_trace_unitarily_invariant(dim in 1usize..=8, seed in any::<u64>()) {
        let pvm = random_pvm(dim, &ranks_for(dim, seed), seed).unwrap();
        let rho = random_density(dim, dim, seed).unwrap();
        let u = haar_unitary(dim, seed.wrapping_add(3));
        let before = block_trace(&rho, &pvm).unwrap();
        let after = block_trace(&rho.conjugated_by(&u).unwrap(), &pvm.conjugated_by(&u).unwrap()).unwrap();
        for (x, y) in before.iter().zip(&after) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn klein_inequality(dim in 1usize..=6, seed in any::<u64>()) {
        let rho = random_density(dim, 1 + (seed as usize % dim), seed).unwrap();
        let sigma = random_density(dim, dim, seed.wrapping_add(1)).unwrap();
        let d = relative_entropy(&rho, &sigma).unwrap();
        prop_assert!(d.to_f64() >= 0.0);
        prop_assert!(relative_entropy(&rho, &rho).unwrap().to_f64() <= 1e-12);
        // D ≈ 0 forces ρ ≈ σ
        if d.to_f64() <= 1e-9 {
            prop_assert!(trace_distance(rho.matrix(), sigma.matrix()).unwrap() <= 1e-4);
        }
    }

    #[test]
    fn divergence_unitarily_invariant(dim in 1usize..=6, seed in any::<u64>()) {
        let rho = random_density(dim, dim, seed).unwrap();
        let sigma = random_density(dim, dim, seed.wrapping_add(1)).unwrap();
        let u = haar_unitary(dim, seed.wrapping_add(2));
        let d = relative_entropy(&rho, &sigma).unwrap().to_f64();
        let du = relative_entropy(&rho.conjugated_by(&u).unwrap(), &sigma.conjugated_by(&u).unwrap()).unwrap().to_f64();
        prop_assert!((d - du).abs() <= 1e-10);
    }

    #[test]
    fn joint_convexity(dim in 1usize..=5, seed in any::<u64>()) {
        let r1 = random_density(dim, dim, seed).unwrap();
        let r2 = random_density(dim, dim, seed.wrapping_add(1)).unwrap();
        let s1 = random_density(dim, dim, seed.wrapping_add(2)).unwrap();
        let s2 = random_density(dim, dim, seed.wrapping_add(3)).unwrap();
        let d = |a: &DensityOperator, b: &DensityOperator| relative_entropy(a, b).unwrap().to_f64();
        for t in [0.25, 0.5, 0.75] {
            let lhs = d(&r1.mix(&r2, t).unwrap(), &s1.mix(&s2, t).unwrap());
            prop_assert!(lhs <= t * d(&r1, &s1) + (1.0 - t) * d(&r2, &s2) + 1e-10);
        }
    }

    #[test]
    fn pinching_raises_entropy(dim in 1usize..=8, seed in any::<u64>()) {
        let pvm = random_pvm(dim, &ranks_for(dim, seed), seed).unwrap();
        let rho = random_density(dim, 1 + (seed as usize % dim), seed).unwrap();
        let sigma = weak_collapse(&rho, &pvm).unwrap().post_state;
        prop_assert!(von_neumann_entropy(&sigma) >= von_neumann_entropy(&rho) - 1e-10);
        let d = relative_entropy(&rho, &sigma).unwrap();
        prop_assert!(d.is_finite());
        prop_assert!((d.to_f64() - (von_neumann_entropy(&sigma) - von_neumann_entropy(&rho))).abs() <= 1e-10);
    }

    #[test]
    fn pinching_idempotent_and_covariant(dim in 1usize..=8, seed in any::<u64>()) {
        let pvm = random_pvm(dim, &ranks_for(dim, seed), seed).unwrap();
        let rho = random_density(dim, dim, seed).unwrap();
        let once = weak_collapse(&rho, &pvm).unwrap().post_state;
        let twice = weak_collapse(&once, &pvm).unwrap().post_state;
        prop_assert!((once.matrix() - twice.matrix()).max_abs() <= 1e-12);

        let born = block_trace(&rho, &pvm).unwrap();
        let jeffrey = jeffrey_collapse(&rho, &pvm, &BlockProbabilities::new(born.clone()).unwrap_or_else(|_| {
            let s: f64 = born.iter().sum();
            BlockProbabilities::new(born.iter().map(|x| x / s).collect()).unwrap()
        })).unwrap().post_state;
        prop_assert!((once.matrix() - jeffrey.matrix()).max_abs() <= 1e-12);

        let u = random_block_unitary_with(&pvm, &mut seeded_rng(seed.wrapping_add(5)));
        let lhs = weak_collapse(&rho.conjugated_by(&u).unwrap(), &pvm).unwrap().post_state;
        let rhs = once.conjugated_by(&u).unwrap();
        prop_assert!((lhs.matrix() - rhs.matrix()).max_abs() <= 1e-10);
    }

    #[test]
    fn strong_collapse_repeats(dim in 1usize..=8, seed in any::<u64>()) {
        let pvm = random_pvm(dim, &ranks_for(dim, seed), seed).unwrap();
        let rho = random_density(dim, dim, seed).unwrap();
        let k = seed as usize % pvm.len();
        let first = strong_collapse(&rho, &pvm, k).unwrap().post_state;
        prop_assert!((first.matrix().trace_product(pvm.projector(k)).re - 1.0).abs() <= 1e-10);
        let second = strong_collapse(&first, &pvm, k).unwrap().post_state;
        prop_assert!((first.matrix() - second.matrix()).max_abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn minimize_objective_nonincreasing(dim in 2usize..=6, seed in any::<u64>(), jeffrey in any::<bool>()) {
        let pvm = random_pvm(dim, &ranks_for(dim, seed), seed).unwrap();
        let rho = random_density(dim, dim, seed).unwrap();
        let cset = if jeffrey {
            let n = pvm.len();
            ConstraintSet::jeffrey(pvm, probabilities(n, seed)).unwrap()
        } else {
            ConstraintSet::weak(pvm)
        };
        let res = minimize(&rho, &cset, &MinimizeOptions::default()).unwrap();
        prop_assert!(res.objective_trace.len() == res.iterations + 1);
        // rounding of the objective itself is the only allowed increase
        prop_assert!(res.objective_trace.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        prop_assert!(res.converged);
    }

    #[test]
    fn argmin_follows_block_unitary(dim in 2usize..=6, seed in any::<u64>(), jeffrey in any::<bool>()) {
        let pvm = random_pvm(dim, &ranks_for(dim, seed), seed).unwrap();
        let rho = random_density(dim, dim, seed).unwrap();
        let u = random_block_unitary_with(&pvm, &mut seeded_rng(seed.wrapping_add(11)));
        let cset = if jeffrey {
            let n = pvm.len();
            ConstraintSet::jeffrey(pvm, probabilities(n, seed)).unwrap()
        } else {
            ConstraintSet::weak(pvm)
        };
        let opts = MinimizeOptions::default();
        let plain = minimize(&rho, &cset, &opts).unwrap().minimizer;
        let rotated = minimize(&rho.conjugated_by(&u).unwrap(), &cset, &opts).unwrap().minimizer;
        prop_assert!((rotated.matrix() - &plain.matrix().conjugated_by(&u)).max_abs() <= 1e-8);
    }

    #[test]
    fn bayes_is_indicator_maxent(n in 2usize..=8, seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let raw: Vec<f64> = (0..n).map(|_| 0.01 + rng.random::<f64>()).collect();
        let s: f64 = raw.iter().sum();
        let prior = DiscreteDistribution::new(raw.iter().map(|x| x / s).collect()).unwrap();
        let cell: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.5)).collect();
        prop_assume!(!cell.is_empty() && cell.len() < n);
        let rest: Vec<usize> = (0..n).filter(|x| !cell.contains(x)).collect();
        let posterior = bayes_update(&prior, &LikelihoodModel::indicator(n, &cell).unwrap()).unwrap();
        let target = BlockProbabilities::new(vec![1.0, 0.0]).unwrap();
        let maxent = maxent_update(&prior, &[cell, rest], &target).unwrap();
        for (a, b) in posterior.weights().iter().zip(maxent.weights()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
        let soft = maxent_update(&prior, &[(0..n / 2).collect(), (n / 2..n).collect()], &probabilities(2, seed)).unwrap();
        prop_assert!(kl_divergence(prior.weights(), soft.weights()).unwrap().is_finite());
    }
}
