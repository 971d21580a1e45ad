//! Exact closed-loop simulation, exhaustive switching-sequence checking, and
//! a greedy worst-case switching adversary.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::Zero;

use crate::ladder::ModeMatrices;
use crate::matrix::norm_sq;
use crate::rational::{approx, Rational};
use crate::system::SwitchedSystem;

/// Default cap on sequence-state pairs for exhaustive enumeration.
pub const DEFAULT_BUDGET: u128 = 1_000_000;

/// A closed-loop run. `states` has one more entry than `sigma`; the defining
/// relation `states[t+1] = A_{σ(t)} states[t] + B_{σ(t)} inputs[t]` holds
/// exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trajectory {
    pub x0: Vec<Rational>,
    pub sigma: Vec<usize>,
    pub states: Vec<Vec<Rational>>,
    pub inputs: Vec<Vec<Rational>>,
}

impl Trajectory {
    pub fn horizon(&self) -> usize {
        self.sigma.len()
    }

    pub fn final_state(&self) -> &[Rational] {
        self.states.last().expect("states never empty")
    }

    /// First time index whose state is exactly zero, if any.
    pub fn first_zero_step(&self) -> Option<usize> {
        self.states.iter().position(|x| x.iter().all(Zero::is_zero))
    }

    /// Exact squared Euclidean norm of every state.
    pub fn norms_sq(&self) -> Vec<Rational> {
        self.states.iter().map(|x| norm_sq(x)).collect()
    }
}

/// Outcome of checking every switching sequence of a fixed horizon against a
/// set of initial states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExhaustiveReport {
    pub horizon: usize,
    pub all_reach_zero: bool,
    pub counterexample: Option<Counterexample>,
    /// Always the full count `M^horizon × #initials`: enumeration never
    /// stops early, so the first counterexample is the lexicographic one.
    pub sequences_checked: u128,
}

/// A sequence-state pair whose trajectory fails to reach zero, with the
/// nonzero state it lands on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub x0: Vec<Rational>,
    pub sigma: Vec<usize>,
    pub final_state: Vec<Rational>,
}

/// Initial states for exhaustive checking. The standard basis suffices for
/// the all-states quantifier because the closed loop is linear in the state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InitialStates {
    StandardBasis,
    Explicit(Vec<Vec<Rational>>),
}

/// The enumeration would visit more sequence-state pairs than allowed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BudgetExceeded {
    pub required: u128,
    pub budget: u128,
}

impl fmt::Display for BudgetExceeded {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "exhaustive check needs {} sequence-state pairs, budget is {}",
            self.required, self.budget
        )
    }
}

impl core::error::Error for BudgetExceeded {}

/// The standard basis of an `n`-dimensional state space.
pub fn standard_basis(n: usize) -> Vec<Vec<Rational>> {
    (0..n)
        .map(|i| {
            let mut e = vec![Rational::zero(); n];
            e[i] = Rational::from_integer(1.into());
            e
        })
        .collect()
}

/// One exact update `A_j x + B_j u`.
pub fn step(sys: &SwitchedSystem, j: usize, x: &[Rational], u: &[Rational]) -> Vec<Rational> {
    let ax = sys.a(j).mul_vec(x);
    let bu = sys.b(j).mul_vec(u);
    ax.into_iter().zip(bu).map(|(a, b)| a + b).collect()
}

/// Runs the closed loop `u(t) = K_{σ(t)} x(t)` along `sigma`.
pub fn simulate(
    sys: &SwitchedSystem,
    gains: &ModeMatrices,
    x0: &[Rational],
    sigma: &[usize],
) -> Trajectory {
    let zero = vec![vec![Rational::zero(); sys.input_dim()]; sigma.len()];
    simulate_driven(sys, gains, x0, sigma, &zero)
}

/// Like [`simulate`] but with an external input added on top of the feedback:
/// `u(t) = K_{σ(t)} x(t) + v[t]`. Requires one `v` entry per step.
pub fn simulate_driven(
    sys: &SwitchedSystem,
    gains: &ModeMatrices,
    x0: &[Rational],
    sigma: &[usize],
    v: &[Vec<Rational>],
) -> Trajectory {
    assert_eq!(x0.len(), sys.state_dim(), "initial state dimension");
    assert_eq!(v.len(), sigma.len(), "one external input per step");
    let mut states = Vec::with_capacity(sigma.len() + 1);
    let mut inputs = Vec::with_capacity(sigma.len());
    states.push(x0.to_vec());
    for (t, &j) in sigma.iter().enumerate() {
        let x = states.last().expect("states never empty");
        let mut u = gains.for_mode(j).mul_vec(x);
        for (ui, vi) in u.iter_mut().zip(&v[t]) {
            *ui += vi;
        }
        let next = step(sys, j, x, &u);
        inputs.push(u);
        states.push(next);
    }
    Trajectory { x0: x0.to_vec(), sigma: sigma.to_vec(), states, inputs }
}

/// Checks every switching sequence of length `horizon` against every initial
/// state, asking whether the closed loop lands exactly on zero at the end.
///
/// Enumeration order is lexicographic in the sequence with the initial states
/// innermost, always runs to completion, and the first failing pair is
/// reported, so results are reproducible.
pub fn exhaustive_fts_check(
    sys: &SwitchedSystem,
    gains: &ModeMatrices,
    horizon: usize,
    initial: &InitialStates,
    budget: u128,
) -> Result<ExhaustiveReport, BudgetExceeded> {
    let initials = resolve_initials(sys, initial);
    let required = sequence_count(sys.mode_count(), horizon)
        .and_then(|s| s.checked_mul(initials.len() as u128))
        .unwrap_or(u128::MAX);
    if required > budget {
        return Err(BudgetExceeded { required, budget });
    }
    let (checked, counterexample) = run_sequences(sys, gains, horizon, &initials, &[]);
    debug_assert_eq!(checked, required);
    Ok(ExhaustiveReport {
        horizon,
        all_reach_zero: counterexample.is_none(),
        counterexample,
        sequences_checked: checked,
    })
}

/// The slice of [`exhaustive_fts_check`] covering only sequences that start
/// with `prefix`. Running every prefix of one length and combining reports in
/// prefix order (sum the counts, keep the first counterexample) reproduces
/// the unrestricted check bit for bit; this is the unit of parallelism.
pub fn exhaustive_fts_check_prefixed(
    sys: &SwitchedSystem,
    gains: &ModeMatrices,
    horizon: usize,
    initial: &InitialStates,
    prefix: &[usize],
    budget: u128,
) -> Result<ExhaustiveReport, BudgetExceeded> {
    assert!(prefix.len() <= horizon, "prefix longer than horizon");
    assert!(prefix.iter().all(|&j| j < sys.mode_count()), "prefix mode out of range");
    let initials = resolve_initials(sys, initial);
    let required = sequence_count(sys.mode_count(), horizon - prefix.len())
        .and_then(|s| s.checked_mul(initials.len() as u128))
        .unwrap_or(u128::MAX);
    if required > budget {
        return Err(BudgetExceeded { required, budget });
    }
    let (checked, counterexample) = run_sequences(sys, gains, horizon, &initials, prefix);
    debug_assert_eq!(checked, required);
    Ok(ExhaustiveReport {
        horizon,
        all_reach_zero: counterexample.is_none(),
        counterexample,
        sequences_checked: checked,
    })
}

fn resolve_initials(sys: &SwitchedSystem, initial: &InitialStates) -> Vec<Vec<Rational>> {
    match initial {
        InitialStates::StandardBasis => standard_basis(sys.state_dim()),
        InitialStates::Explicit(v) => {
            for x in v {
                assert_eq!(x.len(), sys.state_dim(), "initial state dimension");
            }
            v.clone()
        }
    }
}

fn sequence_count(modes: usize, horizon: usize) -> Option<u128> {
    (modes as u128).checked_pow(u32::try_from(horizon).ok()?)
}

fn run_sequences(
    sys: &SwitchedSystem,
    gains: &ModeMatrices,
    horizon: usize,
    initials: &[Vec<Rational>],
    prefix: &[usize],
) -> (u128, Option<Counterexample>) {
    let m = sys.mode_count();
    let free = horizon - prefix.len();
    let mut sigma: Vec<usize> = prefix.to_vec();
    sigma.extend(core::iter::repeat(0).take(free));
    let mut checked = 0u128;
    let mut counterexample: Option<Counterexample> = None;
    'sequences: loop {
        for x0 in initials {
            checked += 1;
            let mut x = x0.clone();
            for &j in &sigma {
                let u = gains.for_mode(j).mul_vec(&x);
                x = step(sys, j, &x, &u);
            }
            if counterexample.is_none() && !x.iter().all(Zero::is_zero) {
                counterexample =
                    Some(Counterexample { x0: x0.clone(), sigma: sigma.clone(), final_state: x });
            }
        }
        // odometer over the free tail, most significant digit first
        let mut i = free;
        loop {
            if i == 0 {
                break 'sequences;
            }
            i -= 1;
            let pos = prefix.len() + i;
            sigma[pos] += 1;
            if sigma[pos] < m {
                break;
            }
            sigma[pos] = 0;
        }
    }
    (checked, counterexample)
}

/// A greedy worst-case run: at each step the adversary picks the mode whose
/// successor has the largest exact squared norm, lower index on ties.
#[derive(Clone, Debug, PartialEq)]
pub struct AdversarialRun {
    pub trajectory: Trajectory,
    /// `‖x(t+1)‖² / ‖x(t)‖²` per step, recorded until the state hits zero.
    pub ratios_sq: Vec<Rational>,
    /// Geometric mean of the per-step norm ratios, display only.
    pub geo_mean_rate: Option<f64>,
}

pub fn adversarial_decay(
    sys: &SwitchedSystem,
    gains: &ModeMatrices,
    x0: &[Rational],
    horizon: usize,
) -> AdversarialRun {
    assert_eq!(x0.len(), sys.state_dim(), "initial state dimension");
    let mut states = vec![x0.to_vec()];
    let mut inputs = Vec::new();
    let mut sigma = Vec::new();
    let mut ratios_sq = Vec::new();
    for _ in 0..horizon {
        let x = states.last().expect("states never empty").clone();
        let mut best: Option<(usize, Vec<Rational>, Vec<Rational>, Rational)> = None;
        for j in 0..sys.mode_count() {
            let u = gains.for_mode(j).mul_vec(&x);
            let next = step(sys, j, &x, &u);
            let score = norm_sq(&next);
            if best.as_ref().map_or(true, |(_, _, _, s)| score > *s) {
                best = Some((j, u, next, score));
            }
        }
        let (j, u, next, score) = best.expect("at least one mode");
        let cur_sq = norm_sq(&x);
        if !cur_sq.is_zero() {
            ratios_sq.push(score / cur_sq);
        }
        sigma.push(j);
        inputs.push(u);
        states.push(next);
    }
    let geo_mean_rate = geometric_rate(&ratios_sq);
    AdversarialRun {
        trajectory: Trajectory { x0: x0.to_vec(), sigma, states, inputs },
        ratios_sq,
        geo_mean_rate,
    }
}

fn geometric_rate(ratios_sq: &[Rational]) -> Option<f64> {
    if ratios_sq.is_empty() {
        return None;
    }
    if ratios_sq.iter().any(Zero::is_zero) {
        return Some(0.0);
    }
    let log_sum: f64 = ratios_sq.iter().map(|r| libm::log(approx(r))).sum();
    Some(libm::exp(log_sum / (2.0 * ratios_sq.len() as f64)))
}
