//! The acceptance gate: one test per headline result, each printing a PASS
//! line with the numbers it checked. Everything here is exact arithmetic;
//! the only tolerances are wall-clock limits.
//!
//! `c03a` is expected to fail: the bundled per-mode reference gain for mode 1
//! leaves a geometrically decaying direction, so it cannot drive every state
//! to zero in finite time. The failure message carries the counterexample;
//! `c04` shows that gains synthesized from the ladder pass the same check.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use swstab_core::ladder::{FeedbackKind, Ladder, ModeMatrices};
use swstab_core::matrix::{Matrix, SolvePolicy};
use swstab_core::normalform::{decompose, decompose_with, verify_normal_form};
use swstab_core::rate::{
    arbitrarily_fast, decay_certificate, scalar_min_rate_md, scalar_min_rate_mi,
    verify_decay_bound,
};
use swstab_core::rational::{rat, ratio, Rational};
use swstab_core::simulate::{exhaustive_fts_check, simulate, InitialStates, DEFAULT_BUDGET};
use swstab_core::subspace::Subspace;
use swstab_core::synthesis::{certify_gains, decide_fts, decide_fts_with, synthesize_gains};
use swstab_core::system::SwitchedSystem;

const MD: FeedbackKind = FeedbackKind::ModeDependent;
const MI: FeedbackKind = FeedbackKind::ModeIndependent;

/// The worked example: three states, two modes, one input acting in
/// opposite directions.
fn demo_system() -> SwitchedSystem {
    let a1 = Matrix::from_rows(vec![
        vec![rat(-1), rat(-2), ratio(5, 2)],
        vec![rat(1), rat(1), rat(-1)],
        vec![rat(0), rat(1), rat(0)],
    ]);
    let a2 = Matrix::from_rows(vec![
        vec![rat(-2), rat(-1), ratio(7, 2)],
        vec![rat(2), rat(2), rat(-1)],
        vec![rat(0), rat(-1), ratio(1, 2)],
    ]);
    let b1 = Matrix::from_col(vec![rat(-1), rat(0), rat(1)]);
    let b2 = Matrix::from_col(vec![rat(1), rat(0), rat(-1)]);
    SwitchedSystem::new(vec![a1, a2], vec![b1, b2]).unwrap()
}

/// The per-mode reference gain pair shipped in `data/demo_gains_md.json`.
fn reference_gains_md() -> ModeMatrices {
    ModeMatrices::PerMode(vec![
        Matrix::from_rows(vec![vec![rat(0), rat(-1), ratio(-1, 2)]]),
        Matrix::from_rows(vec![vec![rat(0), rat(-1), ratio(1, 2)]]),
    ])
}

/// The shared reference gain shipped in `data/demo_gains_mi.json`.
fn reference_gain_mi() -> ModeMatrices {
    ModeMatrices::Shared(Matrix::from_rows(vec![vec![rat(0), rat(-1), rat(0)]]))
}

fn x3_plane_basis() -> Vec<Vec<Rational>> {
    vec![vec![rat(1), rat(0), rat(0)], vec![rat(0), rat(1), rat(0)]]
}

#[test]
fn c01_per_mode_ladder_reaches_full_space_in_three_steps() {
    let start = Instant::now();
    let sys = demo_system();
    let ladder = Ladder::build(&sys, MD);
    assert_eq!(ladder.level_dims(), vec![0, 1, 2, 3]);
    assert_eq!(ladder.fixed_point_index(), 3);
    assert!(ladder.fixed_point().is_full());
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "ladder took {elapsed:?}, limit 1 s");
    println!("PASS c01: per-mode ladder dims [0,1,2,3], full space at step 3, {elapsed:?}");
}

#[test]
fn c02_shared_gain_ladder_stalls_on_the_x3_plane() {
    let sys = demo_system();
    let ladder = Ladder::build(&sys, MI);
    assert_eq!(ladder.fixed_point_dim(), 2);
    let plane = Subspace::spanned_by(&Matrix::from_int_rows(&[&[1, 0], &[0, 1], &[0, 0]]));
    assert_eq!(*ladder.fixed_point(), plane, "fixed point must be exactly {{x : x3 = 0}}");
    assert!(!ladder.fixed_point().contains(&[rat(0), rat(0), rat(1)]));
    println!("PASS c02: shared-gain ladder fixes at the plane x3 = 0 (dimension 2)");
}

#[test]
fn c03a_reference_per_mode_gains_annihilate_every_state_at_horizon_3() {
    let start = Instant::now();
    let sys = demo_system();
    let gains = reference_gains_md();
    let report =
        exhaustive_fts_check(&sys, &gains, 3, &InitialStates::StandardBasis, DEFAULT_BUDGET)
            .unwrap();
    assert_eq!(report.sequences_checked, 24, "8 sequences x 3 basis states");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "check took {elapsed:?}, limit 1 s");
    if let Some(ce) = &report.counterexample {
        let sigma_1based: Vec<usize> = ce.sigma.iter().map(|j| j + 1).collect();
        panic!(
            "the bundled per-mode reference gains do not annihilate every state at horizon 3: \
             switching sequence {:?} starting from {:?} ends at {:?}. The mode-1 closed loop \
             A1 + B1*K1 has third row (0, 0, -1/2), so along e3 the state halves forever and \
             never reaches zero; no horizon can fix this. Gains synthesized from the ladder \
             (c04) pass this exact check.",
            sigma_1based,
            ce.x0.iter().map(swstab_core::rational::approx).collect::<Vec<_>>(),
            ce.final_state.iter().map(swstab_core::rational::approx).collect::<Vec<_>>(),
        );
    }
    println!("PASS c03a: reference per-mode gains annihilate all 24 pairs at horizon 3, {elapsed:?}");
}

#[test]
fn c03b_shared_reference_gain_clears_the_plane_and_fails_off_it() {
    let start = Instant::now();
    let sys = demo_system();
    let gains = reference_gain_mi();

    let on_plane = exhaustive_fts_check(
        &sys,
        &gains,
        2,
        &InitialStates::Explicit(x3_plane_basis()),
        DEFAULT_BUDGET,
    )
    .unwrap();
    assert!(on_plane.all_reach_zero, "shared gain must clear the plane in 2 steps");
    assert_eq!(on_plane.sequences_checked, 8, "4 sequences x 2 plane basis vectors");

    let full = exhaustive_fts_check(&sys, &gains, 3, &InitialStates::StandardBasis, DEFAULT_BUDGET)
        .unwrap();
    assert!(!full.all_reach_zero, "no shared gain handles all of 3-space");
    let ce = full.counterexample.as_ref().expect("failing check reports a counterexample");
    assert_eq!(ce.sigma, vec![1, 0, 0]);
    assert_eq!(ce.x0, vec![rat(0), rat(0), rat(1)]);
    assert_eq!(ce.final_state, vec![ratio(-3, 4), ratio(3, 4), rat(0)]);

    // The counterexample replays: stepping the closed loop reproduces it.
    let replay = simulate(&sys, &gains, &ce.x0, &ce.sigma);
    assert_eq!(replay.final_state(), ce.final_state.as_slice());
    assert!(replay.first_zero_step().is_none());

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "checks took {elapsed:?}, limit 1 s");
    println!(
        "PASS c03b: shared gain clears the plane in 2 steps (8 pairs) and fails at horizon 3 \
         with replayable counterexample sigma (2,1,1) from e3, {elapsed:?}"
    );
}

#[test]
fn c04_synthesized_gains_pass_certification_and_the_exhaustive_check() {
    let sys = demo_system();

    let md = synthesize_gains(&Ladder::build(&sys, MD)).unwrap();
    let cert = certify_gains(&sys, &md.gains, &md.ladder);
    assert!(cert.passed(), "violations: {:?}", cert.violations);
    assert_eq!(cert.checks, 12);
    let report =
        exhaustive_fts_check(&sys, &md.gains, 3, &InitialStates::StandardBasis, DEFAULT_BUDGET)
            .unwrap();
    assert!(report.all_reach_zero);
    assert_eq!(report.sequences_checked, 24);

    // The shared-gain synthesis lands on the reference gain exactly and
    // clears the plane it was built for.
    let mi = synthesize_gains(&Ladder::build(&sys, MI)).unwrap();
    assert_eq!(mi.gains, reference_gain_mi());
    let on_plane = exhaustive_fts_check(
        &sys,
        &mi.gains,
        2,
        &InitialStates::Explicit(x3_plane_basis()),
        DEFAULT_BUDGET,
    )
    .unwrap();
    assert!(on_plane.all_reach_zero);

    println!(
        "PASS c04: synthesized per-mode gains pass all 12 descent checks and all 24 \
         horizon-3 pairs; synthesized shared gain equals the reference and clears the plane"
    );
}

#[test]
fn c05_shared_feedback_normal_form_matches_the_recorded_blocks() {
    let sys = demo_system();

    // Canonical decomposition: coupling zero, y-products all vanish, and the
    // residual subsystem has no stabilizable directions left.
    let nf = decompose(&sys, MI);
    assert_eq!(nf.stable_dim, 2);
    assert_eq!(nf.residual_dim(), 1);
    let check = verify_normal_form(&nf);
    assert!(check.passed());
    assert!(check.coupling_violations.is_empty());
    assert_eq!(check.products_checked, 4, "2 modes, all length-2 products");
    assert_eq!(check.nonzero_products, 0);
    assert_eq!(check.xi_fixed_point_dim, 0);

    // Same decomposition in the recorded coordinates: x = T z with T the
    // inverse of the row basis below, under the shared gain (0,-1,0).
    let p = Matrix::from_int_rows(&[&[1, 2, 1], &[1, 1, 1], &[0, 0, 1]]);
    let t = p.invert().unwrap();
    let nf2 = decompose_with(&sys, MI, &reference_gain_mi(), &t).unwrap();
    assert_eq!(nf2.stable_dim, 2);
    let check2 = verify_normal_form(&nf2);
    assert!(check2.passed());
    assert_eq!(check2.nonzero_products, 0);
    assert_eq!(check2.xi_fixed_point_dim, 0);

    // Mode-2 blocks, frozen.
    let m2 = &nf2.blocks[1];
    assert_eq!(m2.a_yy, Matrix::from_int_rows(&[&[0, 2], &[0, 0]]));
    assert_eq!(m2.a_yxi, Matrix::from_int_rows(&[&[0], &[3]]));
    assert_eq!(m2.a_xixi, Matrix::from_rows(vec![vec![ratio(1, 2)]]));
    assert_eq!(m2.b_y, Matrix::zeros(2, 1));
    assert_eq!(m2.b_xi, Matrix::from_int_rows(&[&[-1]]));

    // Mode-1 blocks as recomputed here, recorded for reference; they are a
    // deterministic output of this decomposition, not an external target.
    let m1 = &nf2.blocks[0];
    assert_eq!(m1.a_yy, Matrix::from_int_rows(&[&[0, 1], &[0, 0]]));
    assert_eq!(m1.a_yxi, Matrix::from_rows(vec![vec![ratio(-1, 2)], vec![ratio(3, 2)]]));
    assert_eq!(m1.a_xixi, Matrix::zeros(1, 1));
    assert_eq!(m1.b_y, Matrix::zeros(2, 1));
    assert_eq!(m1.b_xi, Matrix::from_int_rows(&[&[1]]));

    println!(
        "PASS c05: shared-feedback normal form verified (coupling zero, 4/4 y-products zero, \
         residual ladder fixed at {{0}}); mode-2 blocks match the recorded values exactly"
    );
}

#[test]
fn c06_scalar_minimax_rates_hit_the_recorded_optima() {
    let (rate, argmin) = scalar_min_rate_mi(&[ratio(1, 2), ratio(1, 2)], &[rat(1), rat(-1)]);
    assert_eq!(rate, ratio(1, 2));
    assert_eq!(argmin, rat(0));

    let (rate, argmin) = scalar_min_rate_mi(&[rat(0), ratio(1, 2)], &[rat(1), rat(-1)]);
    assert_eq!(rate, ratio(1, 4));
    assert_eq!(argmin, ratio(1, 4));

    // Per-mode gains drive both residuals to zero exactly.
    assert_eq!(scalar_min_rate_md(&[ratio(1, 2), ratio(1, 2)], &[rat(1), rat(-1)]), rat(0));

    println!("PASS c06: scalar minimax rates 1/2 at k = 0 and 1/4 at k = 1/4, exact");
}

fn random_system(rng: &mut ChaCha8Rng) -> SwitchedSystem {
    let n = rng.random_range(1..=3);
    let m = rng.random_range(0..=2);
    let modes = rng.random_range(1..=2);
    let entry = |rng: &mut ChaCha8Rng| rat(rng.random_range(-1..=1));
    let mat = |rng: &mut ChaCha8Rng, r: usize, c: usize| {
        Matrix::from_rows((0..r).map(|_| (0..c).map(|_| entry(rng)).collect()).collect())
    };
    let a = (0..modes).map(|_| mat(rng, n, n)).collect();
    let b = (0..modes).map(|_| mat(rng, n, m)).collect();
    SwitchedSystem::new(a, b).unwrap()
}

/// Gains to test a verdict against: the synthesized ones where they exist,
/// zero gains otherwise.
fn gains_for(sys: &SwitchedSystem, kind: FeedbackKind) -> ModeMatrices {
    synthesize_gains(&Ladder::build(sys, kind)).map(|set| set.gains).unwrap_or_else(|_| {
        ModeMatrices::zeros(kind, sys.input_dim(), sys.state_dim(), sys.mode_count())
    })
}

#[test]
fn c07_verdicts_agree_with_exhaustive_simulation_on_a_seeded_corpus() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x0c07);
    let mut fts_count = [0usize; 2];
    for _ in 0..500 {
        let sys = random_system(&mut rng);
        for (slot, kind) in [(0, MD), (1, MI)] {
            let verdict = decide_fts(&sys, kind);
            let fast = arbitrarily_fast(&sys, kind);
            assert_eq!(fast.arbitrarily_fast, verdict.is_fts());
            assert_eq!(fast.fts_horizon, verdict.horizon());

            // The ladder's verdict against ground truth: wherever it fixes,
            // replaying every sequence from every basis state must agree.
            let p = verdict.ladder().fixed_point_index();
            let gains = gains_for(&sys, kind);
            let report =
                exhaustive_fts_check(&sys, &gains, p, &InitialStates::StandardBasis, DEFAULT_BUDGET)
                    .unwrap();
            assert_eq!(
                report.all_reach_zero,
                verdict.is_fts(),
                "verdict and exhaustive replay disagree at horizon {p}"
            );
            if verdict.is_fts() {
                fts_count[slot] += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "corpus took {elapsed:?}, limit 60 s");
    println!(
        "PASS c07: verdicts match exhaustive replay on 500 seeded systems \
         ({} per-mode / {} shared stabilizable), {elapsed:?}",
        fts_count[0], fts_count[1]
    );
}

#[test]
fn c08_structural_properties_hold_on_a_seeded_corpus() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0c08);
    let scales = [ratio(1, 2), rat(2), rat(3)];

    for _ in 0..100 {
        let sys = random_system(&mut rng);
        let n = sys.state_dim();
        let md = Ladder::build(&sys, MD);
        let mi = Ladder::build(&sys, MI);

        for ladder in [&md, &mi] {
            // Monotone chain that fixes within n steps.
            for pair in ladder.steps.windows(2) {
                assert!(pair[0].subspace.is_subspace_of(&pair[1].subspace));
            }
            assert!(ladder.fixed_point_index() <= n);
            assert!(ladder.steps.len() <= n + 1);
        }

        // A shared gain is a constrained per-mode gain: every level refines.
        let depth = md.steps.len().max(mi.steps.len());
        for k in 0..depth {
            assert!(mi.level(k).is_subspace_of(md.level(k)));
        }

        // Scaling the state matrices moves breakpoints but not subspaces.
        for rho in &scales {
            let scaled = sys.scaled(rho);
            for (kind, ladder) in [(MD, &md), (MI, &mi)] {
                let scaled_ladder = Ladder::build(&scaled, kind);
                for k in 0..depth {
                    assert_eq!(scaled_ladder.level(k), ladder.level(k));
                }
            }
        }

        // Tie-breaking inside the solver must not leak into verdicts.
        for kind in [MD, MI] {
            let v0 = decide_fts_with(&sys, kind, SolvePolicy::FreeZero);
            let v1 = decide_fts_with(&sys, kind, SolvePolicy::FreeOne);
            assert_eq!(v0.is_fts(), v1.is_fts());
            assert_eq!(v0.horizon(), v1.horizon());
            assert_eq!(v0.ladder().level_dims(), v1.ladder().level_dims());
        }
    }

    // Subspace calculus: modular law (with U inside W) and canonical-form
    // uniqueness under change of spanning set.
    let mut dims_seen = 0usize;
    for _ in 0..100 {
        let n = rng.random_range(1..=4);
        let mat = |rng: &mut ChaCha8Rng, cols: usize| {
            Matrix::from_rows(
                (0..n).map(|_| (0..cols).map(|_| rat(rng.random_range(-2..=2))).collect()).collect(),
            )
        };
        let w_cols = rng.random_range(1..=n);
        let w_mat = mat(&mut rng, w_cols);
        let w = Subspace::spanned_by(&w_mat);
        let u = Subspace::spanned_by(&w_mat.submatrix(0, n, 0, 1));
        let v_cols = rng.random_range(1..=n);
        let v = Subspace::spanned_by(&mat(&mut rng, v_cols));
        assert!(u.is_subspace_of(&w));
        assert_eq!(u.sum(&v).intersect(&w), u.sum(&v.intersect(&w)), "modular law");

        // Right-multiplying by an invertible G changes the spanning set,
        // never the subspace, hence never the canonical basis.
        let g = loop {
            let cand = Matrix::from_rows(
                (0..w_cols)
                    .map(|_| (0..w_cols).map(|_| rat(rng.random_range(-2..=2))).collect())
                    .collect(),
            );
            if cand.invert().is_ok() {
                break cand;
            }
        };
        let recombined = Subspace::spanned_by(&w_mat.mul(&g));
        assert_eq!(recombined, w);
        assert_eq!(recombined.basis(), w.basis());
        dims_seen += w.dim();
    }
    assert!(dims_seen > 0);

    println!(
        "PASS c08: nesting, depth bound, shared-in-per-mode refinement, scale invariance, \
         tie-break invariance, modular law, canonical bases on 100 seeded systems"
    );
}

#[test]
fn c09_decay_bound_holds_exhaustively_at_rate_one_half() {
    let sys = demo_system();
    let synthesized = synthesize_gains(&Ladder::build(&sys, MD)).unwrap().gains;

    // Same certificate either way: the mode-2 closed loops coincide and
    // dominate the Frobenius bound.
    for (label, gains) in [("synthesized", synthesized), ("reference", reference_gains_md())] {
        let cert = decay_certificate(&sys, &gains, &ratio(1, 2)).unwrap();
        assert_eq!(cert.horizon, 3);
        let report = verify_decay_bound(&sys, &cert, 6, DEFAULT_BUDGET).unwrap();
        assert!(
            report.holds(),
            "{label} gains violate the certified bound: {:?}",
            report.first_violation
        );
        assert_eq!(report.pairs_checked, 192, "64 sequences x 3 basis states");
    }

    println!(
        "PASS c09: norm bound C*(1/2)^t certified and exhaustively verified over 64 sequences, \
         horizon 6, for synthesized and reference per-mode gains (192 pairs each)"
    );
}
