//! Randomized property tests for invariants without closed-form oracles:
//! simplex and Kolmogorov consistency of equilibrium cylinder weights,
//! invariance of the measure under constant shifts of phi, and exactness of
//! the high-precision exponential behind the Perron solver.

use proptest::prelude::*;
use zerotemp::bigfloat::Bf;
use zerotemp::finite_beta::equilibrium_state;
use zerotemp::graph::Digraph;
use zerotemp::potentials::{rat, PotentialPhi, PotentialPsi};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn equilibrium_simplex_and_consistency(
        n in 2usize..=4,
        mask in proptest::collection::vec(any::<bool>(), 16),
        phi_idx in proptest::collection::vec(0usize..6, 16),
        psi_cents in proptest::collection::vec(-20i32..=20, 16),
        beta in 0.0f64..6.0,
    ) {
        let grid = [rat(0, 1), rat(-1, 2), rat(-1, 1), rat(-3, 2), rat(-2, 1), rat(-3, 1)];
        let mut arrows = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if mask[a * 4 + b] {
                    arrows.push((a, b));
                }
            }
        }
        let names = (0..n).map(|i| format!("s{i}")).collect();
        let g = Digraph::from_indices(names, arrows.clone());
        prop_assume!(g.arrow_count() > 0 && g.is_irreducible());
        let phi = PotentialPhi::new(
            &g,
            arrows.iter().map(|&(a, b)| ((a, b), grid[phi_idx[a * 4 + b]].clone())).collect(),
        );
        let psi = PotentialPsi::new(
            &g,
            arrows.iter().map(|&(a, b)| ((a, b), f64::from(psi_cents[a * 4 + b]) * 0.01)).collect(),
        );
        let mu = equilibrium_state(&g, &phi, &psi, beta).unwrap();
        let masses: Vec<f64> = (0..n).map(|s| mu.cylinder(&[s])).collect();
        for m in &masses {
            prop_assert!(*m >= 0.0 && *m <= 1.0 + 1e-12, "mass {m} off the simplex");
        }
        let total: f64 = masses.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-10, "masses sum to {total}");
        // Kolmogorov consistency in both directions
        for a in 0..n {
            let right: f64 = (0..n).map(|b| mu.cylinder(&[a, b])).sum();
            prop_assert!((right - masses[a]).abs() < 1e-10);
            let left: f64 = (0..n).map(|b| mu.cylinder(&[b, a])).sum();
            prop_assert!((left - masses[a]).abs() < 1e-10);
        }
    }

    #[test]
    fn constant_shift_leaves_measure_invariant(c in -3i64..=3, beta in 0.0f64..5.0) {
        let (g, phi, psi) = zerotemp::fixtures::example2();
        let shifted = phi.shifted(&rat(c, 1));
        let mu = equilibrium_state(&g, &phi, &psi, beta).unwrap();
        let mu_shift = equilibrium_state(&g, &shifted, &psi, beta).unwrap();
        for s in 0..g.n() {
            prop_assert!((mu.cylinder(&[s]) - mu_shift.cylinder(&[s])).abs() < 1e-11);
            prop_assert!((mu.cylinder(&[s, s]) - mu_shift.cylinder(&[s, s])).abs() < 1e-11);
        }
    }

    #[test]
    fn bigfloat_exp_is_a_homomorphism(
        an in -400i64..=400,
        ad in 1i64..=12,
        bn in -400i64..=400,
        bd in 1i64..=12,
    ) {
        let prec = 512u64;
        let a = rat(an, ad);
        let b = rat(bn, bd);
        let p = Bf::exp_rat(&a, prec).mul(&Bf::exp_rat(&b, prec), prec);
        let q = Bf::exp_rat(&(a + b), prec);
        let rel = p.sub(&q, prec).log2() - q.log2();
        prop_assert!(rel < -(prec as f64) + 24.0, "relative deviation 2^{rel}");
    }
}
