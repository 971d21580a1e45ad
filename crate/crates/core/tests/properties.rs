//! Randomized structural properties: ladder nesting and termination, kind
//! and scaling comparisons, tie-breaking invariance, subspace lattice laws,
//! closed-loop linearity, and agreement between ladder membership and the
//! brute-force simulation oracle.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use swstab_core::ladder::{md_ladder, mi_ladder, FeedbackKind, Ladder, ModeMatrices};
use swstab_core::matrix::{Matrix, SolvePolicy};
use swstab_core::rate::scalar_min_rate_mi;
use swstab_core::rational::{rat, ratio, Rational};
use swstab_core::simulate::{exhaustive_fts_check, simulate, InitialStates, DEFAULT_BUDGET};
use swstab_core::subspace::Subspace;
use swstab_core::synthesis::{decide_fts_with, synthesize_gains};
use swstab_core::system::SwitchedSystem;

use num_traits::Signed;

fn matrix_from(rows: usize, cols: usize, vals: &[i64]) -> Matrix {
    Matrix::from_fn(rows, cols, |r, c| rat(vals[r * cols + c]))
}

/// Systems with `n ≤ 3`, `m ≤ 2`, at most two modes and entries in
/// `{-1, 0, 1}`: small enough for exhaustive cross-checks, rich enough to
/// hit every ladder shape.
fn small_system() -> impl Strategy<Value = SwitchedSystem> {
    (1..=3usize, 0..=2usize, 1..=2usize).prop_flat_map(|(n, m, modes)| {
        let a = prop::collection::vec(prop::collection::vec(-1..=1i64, n * n), modes);
        let b = prop::collection::vec(prop::collection::vec(-1..=1i64, n * m), modes);
        (a, b).prop_map(move |(avs, bvs)| {
            SwitchedSystem::new(
                avs.iter().map(|v| matrix_from(n, n, v)).collect(),
                bvs.iter().map(|v| matrix_from(n, m, v)).collect(),
            )
            .expect("generated shapes are consistent")
        })
    })
}

fn both_ladders(sys: &SwitchedSystem) -> [Ladder; 2] {
    [md_ladder(sys), mi_ladder(sys)]
}

/// Synthesized gains when any direction is stabilizable, zero gains
/// otherwise; either way a valid feedback for oracle comparisons.
fn gains_for(sys: &SwitchedSystem, ladder: &Ladder) -> ModeMatrices {
    synthesize_gains(ladder).map(|set| set.gains).unwrap_or_else(|_| {
        ModeMatrices::zeros(ladder.kind, sys.input_dim(), sys.state_dim(), sys.mode_count())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn ladder_levels_are_nested(sys in small_system()) {
        for lad in both_ladders(&sys) {
            for k in 1..=lad.fixed_point_index() {
                prop_assert!(lad.level(k - 1).is_subspace_of(lad.level(k)));
            }
        }
    }

    #[test]
    fn ladder_fixes_within_state_dimension(sys in small_system()) {
        for lad in both_ladders(&sys) {
            prop_assert!(lad.fixed_point_index() <= sys.state_dim());
            // one extra step only confirms the fixed point
            prop_assert!(lad.steps.len() <= sys.state_dim() + 1);
        }
    }

    #[test]
    fn shared_feedback_levels_refine_per_mode_levels(sys in small_system()) {
        let md = md_ladder(&sys);
        let mi = mi_ladder(&sys);
        for k in 0..=sys.state_dim() {
            prop_assert!(mi.level(k).is_subspace_of(md.level(k)));
        }
    }

    #[test]
    fn ladder_is_invariant_under_state_matrix_scaling(sys in small_system()) {
        for rho in [ratio(1, 2), rat(2), rat(3)] {
            let scaled = sys.scaled(&rho);
            for (lad, lad_scaled) in both_ladders(&sys).iter().zip(both_ladders(&scaled).iter()) {
                prop_assert_eq!(lad.fixed_point_index(), lad_scaled.fixed_point_index());
                for k in 0..=sys.state_dim() {
                    prop_assert_eq!(lad.level(k), lad_scaled.level(k));
                }
            }
        }
    }

    #[test]
    fn verdicts_are_invariant_under_solver_tie_breaking(sys in small_system()) {
        for kind in [FeedbackKind::ModeDependent, FeedbackKind::ModeIndependent] {
            let free_zero = decide_fts_with(&sys, kind, SolvePolicy::FreeZero);
            let free_one = decide_fts_with(&sys, kind, SolvePolicy::FreeOne);
            prop_assert_eq!(free_zero.is_fts(), free_one.is_fts());
            prop_assert_eq!(free_zero.horizon(), free_one.horizon());
            prop_assert_eq!(free_zero.ladder().level_dims(), free_one.ladder().level_dims());
        }
    }

    #[test]
    fn simulation_is_linear_in_the_initial_state(
        sys in small_system(),
        raw_x in prop::collection::vec(-2..=2i64, 3),
        raw_y in prop::collection::vec(-2..=2i64, 3),
        alpha in -2..=2i64,
        beta in -2..=2i64,
        raw_sigma in prop::collection::vec(0..=1usize, 3),
    ) {
        let n = sys.state_dim();
        let sigma: Vec<usize> = raw_sigma.iter().map(|j| j % sys.mode_count()).collect();
        let x: Vec<Rational> = raw_x[..n].iter().map(|&v| rat(v)).collect();
        let y: Vec<Rational> = raw_y[..n].iter().map(|&v| rat(v)).collect();
        let mixed: Vec<Rational> =
            x.iter().zip(&y).map(|(a, b)| a * rat(alpha) + b * rat(beta)).collect();
        let gains = gains_for(&sys, &md_ladder(&sys));
        let tx = simulate(&sys, &gains, &x, &sigma);
        let ty = simulate(&sys, &gains, &y, &sigma);
        let tm = simulate(&sys, &gains, &mixed, &sigma);
        for t in 0..=sigma.len() {
            for i in 0..n {
                prop_assert_eq!(
                    &tm.states[t][i],
                    &(&tx.states[t][i] * rat(alpha) + &ty.states[t][i] * rat(beta))
                );
            }
        }
    }

    #[test]
    fn ladder_membership_matches_the_simulation_oracle(sys in small_system()) {
        for lad in both_ladders(&sys) {
            let gains = gains_for(&sys, &lad);
            for level in [1, lad.fixed_point_index()] {
                for x0 in swstab_core::simulate::standard_basis(sys.state_dim()) {
                    let member = lad.level(level).contains(&x0);
                    let report = exhaustive_fts_check(
                        &sys,
                        &gains,
                        level,
                        &InitialStates::Explicit(vec![x0]),
                        DEFAULT_BUDGET,
                    )
                    .expect("tiny enumeration");
                    prop_assert_eq!(member, report.all_reach_zero);
                }
            }
        }
    }

    #[test]
    fn sum_and_intersection_bound_their_arguments(
        raw_u in prop::collection::vec(-2..=2i64, 6),
        raw_v in prop::collection::vec(-2..=2i64, 6),
    ) {
        let u = Subspace::spanned_by(&matrix_from(3, 2, &raw_u));
        let v = Subspace::spanned_by(&matrix_from(3, 2, &raw_v));
        let sum = u.sum(&v);
        let meet = u.intersect(&v);
        prop_assert!(u.is_subspace_of(&sum));
        prop_assert!(v.is_subspace_of(&sum));
        prop_assert!(meet.is_subspace_of(&u));
        prop_assert!(meet.is_subspace_of(&v));
        prop_assert_eq!(u.sum(&v), v.sum(&u));
        prop_assert_eq!(u.intersect(&v), v.intersect(&u));
    }

    #[test]
    fn modular_law_holds_when_one_side_is_contained(
        raw_w in prop::collection::vec(-2..=2i64, 6),
        raw_v in prop::collection::vec(-2..=2i64, 6),
    ) {
        let w_basis = matrix_from(3, 2, &raw_w);
        let w = Subspace::spanned_by(&w_basis);
        let u = Subspace::spanned_by(&w_basis.select_cols(&[0]));
        let v = Subspace::spanned_by(&matrix_from(3, 2, &raw_v));
        prop_assert!(u.is_subspace_of(&w));
        prop_assert_eq!(u.sum(&v).intersect(&w), u.sum(&v.intersect(&w)));
    }

    #[test]
    fn canonical_basis_ignores_the_spanning_set(
        raw_s in prop::collection::vec(-2..=2i64, 9),
        raw_g in prop::collection::vec(-2..=2i64, 9),
    ) {
        let s = matrix_from(3, 3, &raw_s);
        let g = matrix_from(3, 3, &raw_g);
        prop_assume!(g.invert().is_ok());
        prop_assert_eq!(Subspace::spanned_by(&s), Subspace::spanned_by(&s.mul(&g)));
    }

    #[test]
    fn scalar_solver_result_is_attained_and_unbeaten(
        raw_a in prop::collection::vec((-3..=3i64, 1..=3i64), 1..=3),
        raw_b in prop::collection::vec((-3..=3i64, 1..=3i64), 1..=3),
        probes in prop::collection::vec((-9..=9i64, 1..=4i64), 20),
    ) {
        let len = raw_a.len().min(raw_b.len());
        let a: Vec<Rational> = raw_a[..len].iter().map(|&(n, d)| ratio(n, d)).collect();
        let b: Vec<Rational> = raw_b[..len].iter().map(|&(n, d)| ratio(n, d)).collect();
        let worst = |k: &Rational| -> Rational {
            a.iter().zip(&b).map(|(ai, bi)| (ai + bi * k).abs()).max().unwrap()
        };
        let (rho, k_star) = scalar_min_rate_mi(&a, &b);
        prop_assert_eq!(worst(&k_star), rho.clone());
        for (n, d) in probes {
            prop_assert!(worst(&ratio(n, d)) >= rho);
        }
    }
}

#[test]
fn scalar_solver_survives_a_dense_seeded_probe() {
    let instances: [(&[Rational], &[Rational]); 4] = [
        (&[ratio(1, 2), ratio(1, 2)], &[rat(1), rat(-1)]),
        (&[rat(0), ratio(1, 2)], &[rat(1), rat(-1)]),
        (&[rat(2)], &[rat(0)]),
        (&[ratio(1, 3), ratio(-2, 5), rat(1)], &[rat(1), ratio(1, 2), rat(-2)]),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(0x5ca1a);
    for (a, b) in instances {
        let (rho, k_star) = scalar_min_rate_mi(a, b);
        let worst = |k: &Rational| -> Rational {
            a.iter().zip(b).map(|(ai, bi)| (ai + bi * k).abs()).max().unwrap()
        };
        assert_eq!(worst(&k_star), rho);
        for _ in 0..10_000 {
            let k = ratio(rng.random_range(-100..=100), rng.random_range(1..=100));
            assert!(worst(&k) >= rho, "beaten at k = {k}");
        }
    }
}
