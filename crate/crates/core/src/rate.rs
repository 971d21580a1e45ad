//! Growth-rate analysis: one-step annihilation witnesses, the
//! arbitrarily-fast-stabilization verdict, exponential decay certificates,
//! exact scalar minimax rates, and a sampled lower-bound estimator.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ladder::{FeedbackKind, Ladder, ModeMatrices};
use crate::matrix::{norm_sq, Matrix};
use crate::rational::{approx, sqrt_upper_bound, Rational};
use crate::simulate::{simulate, standard_basis, step, BudgetExceeded};
use crate::synthesis::decide_fts;
use crate::system::SwitchedSystem;

/// A direction that every mode can send to zero in a single step:
/// `A_j x + B_j u_j = 0` for all `j`, with a shared `u` for the
/// mode-independent kind. `inputs` holds the `u_j` as column matrices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnnihilationWitness {
    pub x: Vec<Rational>,
    pub inputs: ModeMatrices,
}

/// Returns a witness iff the first ladder level is nontrivial.
pub fn one_step_annihilation(
    sys: &SwitchedSystem,
    kind: FeedbackKind,
) -> Option<AnnihilationWitness> {
    let ladder = Ladder::build(sys, kind);
    if ladder.level(1).dim() == 0 {
        return None;
    }
    let x = ladder.basis.col(0);
    let inputs = ladder.inputs.map(|u| u.select_cols(&[0]));
    for j in 0..sys.mode_count() {
        debug_assert!(
            step(sys, j, &x, &inputs.for_mode(j).col(0)).iter().all(Zero::is_zero),
            "witness must be annihilated by every mode"
        );
    }
    Some(AnnihilationWitness { x, inputs })
}

/// Whether the system can be driven to zero at any prescribed exponential
/// rate. This holds exactly when it is fixed-time stabilizable, so the
/// verdict is a repackaged [`decide_fts`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RateVerdict {
    pub kind: FeedbackKind,
    pub arbitrarily_fast: bool,
    pub fts_horizon: Option<usize>,
}

pub fn arbitrarily_fast(sys: &SwitchedSystem, kind: FeedbackKind) -> RateVerdict {
    let verdict = decide_fts(sys, kind);
    RateVerdict { kind, arbitrarily_fast: verdict.is_fts(), fts_horizon: verdict.horizon() }
}

/// Claimed bound `‖x(t)‖ ≤ C ρᵗ ‖x₀‖` for the closed loop under `gains`,
/// with `C = max(1, μ^{p-1}) / ρ^p` and `μ` a rational upper bound on the
/// largest closed-loop Frobenius norm.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecayCertificate {
    pub rho: Rational,
    pub mu: Rational,
    pub c: Rational,
    pub horizon: usize,
    pub gains: ModeMatrices,
}

/// The system is not fixed-time stabilizable for the requested kind, so no
/// decay certificate of this shape exists.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NotFts;

impl fmt::Display for NotFts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "system is not fixed-time stabilizable for the requested feedback kind")
    }
}

impl core::error::Error for NotFts {}

/// Builds the certificate for externally supplied gains.
///
/// The horizon `p` is taken from the system's own stabilizability verdict;
/// only that verdict is checked, not the supplied gains, so the resulting
/// bound is a claim to verify (see [`verify_decay_bound`]), exact when the
/// gains annihilate within `p` steps.
pub fn decay_certificate(
    sys: &SwitchedSystem,
    gains: &ModeMatrices,
    rho: &Rational,
) -> Result<DecayCertificate, NotFts> {
    assert!(rho.is_positive(), "decay rate must be positive");
    let verdict = decide_fts(sys, gains.kind());
    let Some(horizon) = verdict.horizon() else {
        return Err(NotFts);
    };
    let worst_sq = (0..sys.mode_count())
        .map(|j| sys.closed_loop(j, gains.for_mode(j)).frobenius_sq())
        .max()
        .unwrap_or_else(Rational::zero);
    let mu = sqrt_upper_bound(&worst_sq);
    let c_prime = rational_pow(&mu, horizon.saturating_sub(1)).max(Rational::one());
    let c = c_prime / rational_pow(rho, horizon);
    Ok(DecayCertificate { rho: rho.clone(), mu, c, horizon, gains: gains.clone() })
}

/// A sequence, initial state and time step where `‖x(t)‖² > C²ρ²ᵗ‖x₀‖²`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecayViolation {
    pub sigma: Vec<usize>,
    pub x0: Vec<Rational>,
    pub step: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecayReport {
    pub horizon: usize,
    pub pairs_checked: u128,
    pub first_violation: Option<DecayViolation>,
}

impl DecayReport {
    pub fn holds(&self) -> bool {
        self.first_violation.is_none()
    }
}

/// Replays every switching sequence of length `horizon` from every standard
/// basis vector and compares squared norms against the certificate bound at
/// every step, all in exact arithmetic.
pub fn verify_decay_bound(
    sys: &SwitchedSystem,
    cert: &DecayCertificate,
    horizon: usize,
    budget: u128,
) -> Result<DecayReport, BudgetExceeded> {
    let basis = standard_basis(sys.state_dim());
    let required = (sys.mode_count() as u128)
        .checked_pow(u32::try_from(horizon).unwrap_or(u32::MAX))
        .and_then(|s| s.checked_mul(basis.len() as u128))
        .unwrap_or(u128::MAX);
    if required > budget {
        return Err(BudgetExceeded { required, budget });
    }
    let c_sq = &cert.c * &cert.c;
    let rho_sq = &cert.rho * &cert.rho;
    let mut sigma = vec![0usize; horizon];
    let mut checked = 0u128;
    let mut first_violation = None;
    'sequences: loop {
        for x0 in &basis {
            checked += 1;
            let traj = simulate(sys, &cert.gains, x0, &sigma);
            let mut bound = &c_sq * norm_sq(x0);
            for (t, state_sq) in traj.norms_sq().iter().enumerate() {
                if first_violation.is_none() && *state_sq > bound {
                    first_violation =
                        Some(DecayViolation { sigma: sigma.clone(), x0: x0.clone(), step: t });
                }
                bound *= &rho_sq;
            }
        }
        let mut i = horizon;
        loop {
            if i == 0 {
                break 'sequences;
            }
            i -= 1;
            sigma[i] += 1;
            if sigma[i] < sys.mode_count() {
                break;
            }
            sigma[i] = 0;
        }
    }
    debug_assert_eq!(checked, required);
    Ok(DecayReport { horizon, pairs_checked: checked, first_violation })
}

fn rational_pow(r: &Rational, e: usize) -> Rational {
    let mut out = Rational::one();
    for _ in 0..e {
        out *= r;
    }
    out
}

/// Exact minimizer of `f(k) = max_j |a_j + b_j k|` for the scalar switched
/// system `ξ⁺ = a_j ξ + b_j v` under shared linear feedback `v = kξ`.
///
/// `f` is a convex piecewise-linear envelope, so its minimum sits at a kink:
/// either a zero of one piece or a crossing of two. All candidates are
/// enumerated and the smallest argmin is returned with the exact rate.
pub fn scalar_min_rate_mi(a: &[Rational], b: &[Rational]) -> (Rational, Rational) {
    assert_eq!(a.len(), b.len(), "one pair per mode");
    assert!(!a.is_empty(), "at least one mode");
    let f = |k: &Rational| -> Rational {
        a.iter().zip(b).map(|(ai, bi)| (ai + bi * k).abs()).max().expect("nonempty")
    };
    let mut candidates: Vec<Rational> = Vec::new();
    for (ai, bi) in a.iter().zip(b) {
        if !bi.is_zero() {
            candidates.push(-ai / bi);
        }
    }
    for i in 0..a.len() {
        for j in (i + 1)..a.len() {
            let (db, da) = (&b[i] - &b[j], &a[i] - &a[j]);
            if !db.is_zero() {
                candidates.push(-&da / &db);
            }
            let (sb, sa) = (&b[i] + &b[j], &a[i] + &a[j]);
            if !sb.is_zero() {
                candidates.push(-&sa / &sb);
            }
        }
    }
    if candidates.is_empty() {
        // every b_j is zero: f is constant
        let k = Rational::zero();
        return (f(&k), k);
    }
    let mut best_k = candidates[0].clone();
    let mut best_f = f(&best_k);
    for k in &candidates[1..] {
        let fk = f(k);
        if fk < best_f || (fk == best_f && *k < best_k) {
            best_f = fk;
            best_k = k.clone();
        }
    }
    (best_f, best_k)
}

/// Scalar rate under per-mode feedback: each mode with control authority is
/// annihilated on its own, so only uncontrolled modes contribute.
pub fn scalar_min_rate_md(a: &[Rational], b: &[Rational]) -> Rational {
    assert_eq!(a.len(), b.len(), "one pair per mode");
    a.iter()
        .zip(b)
        .map(|(ai, bi)| if bi.is_zero() { ai.abs() } else { Rational::zero() })
        .max()
        .unwrap_or_else(Rational::zero)
}

/// Sampled estimate of `min_{‖x‖=1} min_u max_j ‖A_j x + B_j u‖`.
///
/// Heuristic and floating-point only; never feeds back into exact verdicts.
#[derive(Clone, Debug, PartialEq)]
pub struct LowerBoundEstimate {
    pub estimate: f64,
    pub samples: usize,
    pub seed: u64,
    /// Always false: the inner minimization is numeric and the sphere is
    /// only sampled.
    pub certified: bool,
}

/// `min_u max_j ‖A_j x + B_j u‖` at one state, by cyclic coordinate descent
/// on the input (exact in the single-input case up to ternary-search
/// tolerance).
pub fn minimax_next_norm(sys: &SwitchedSystem, x: &[f64]) -> f64 {
    let fsys = F64System::from(sys);
    libm::sqrt(fsys.minimize_over_u(x))
}

/// Estimates the sphere minimum of [`minimax_next_norm`] from seeded samples.
/// A strictly positive true minimum bounds every achievable decay rate from
/// below; intended for systems whose stacked input matrix has full column
/// rank (reduce inputs first).
pub fn lower_bound_rate_mi(sys: &SwitchedSystem, samples: usize, seed: u64) -> LowerBoundEstimate {
    assert!(sys.state_dim() > 0, "state space must be nonzero-dimensional");
    let fsys = F64System::from(sys);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut estimate = f64::INFINITY;
    for _ in 0..samples {
        let x = sample_unit_vector(&mut rng, sys.state_dim());
        estimate = estimate.min(libm::sqrt(fsys.minimize_over_u(&x)));
    }
    LowerBoundEstimate { estimate, samples, seed, certified: false }
}

fn sample_unit_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = libm::sqrt(x.iter().map(|c| c * c).sum::<f64>());
        if norm > 1e-3 && norm <= 1.0 {
            return x.iter().map(|c| c / norm).collect();
        }
    }
}

struct F64System {
    n: usize,
    m: usize,
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
}

impl F64System {
    fn from(sys: &SwitchedSystem) -> Self {
        let to_f64 = |mat: &Matrix| -> Vec<f64> {
            let mut out = Vec::with_capacity(mat.rows() * mat.cols());
            for r in 0..mat.rows() {
                for c in 0..mat.cols() {
                    out.push(approx(&mat[(r, c)]));
                }
            }
            out
        };
        F64System {
            n: sys.state_dim(),
            m: sys.input_dim(),
            a: (0..sys.mode_count()).map(|j| to_f64(sys.a(j))).collect(),
            b: (0..sys.mode_count()).map(|j| to_f64(sys.b(j))).collect(),
        }
    }

    /// `A_j x + B_j u` for one mode.
    fn residual(&self, j: usize, x: &[f64], u: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|r| {
                let ax: f64 = (0..self.n).map(|c| self.a[j][r * self.n + c] * x[c]).sum();
                let bu: f64 = (0..self.m).map(|c| self.b[j][r * self.m + c] * u[c]).sum();
                ax + bu
            })
            .collect()
    }

    fn worst_next_sq(&self, x: &[f64], u: &[f64]) -> f64 {
        (0..self.a.len())
            .map(|j| self.residual(j, x, u).iter().map(|c| c * c).sum())
            .fold(0.0, f64::max)
    }

    /// Convex in `u`; coordinate-wise the objective is a maximum of
    /// parabolas, so each 1-D slice is unimodal and ternary search applies.
    fn minimize_over_u(&self, x: &[f64]) -> f64 {
        let mut u = vec![0.0; self.m];
        let rounds = if self.m <= 1 { 1 } else { 8 * self.m };
        for _ in 0..rounds {
            for coord in 0..self.m {
                self.minimize_coordinate(x, &mut u, coord);
            }
        }
        self.worst_next_sq(x, &u)
    }

    fn minimize_coordinate(&self, x: &[f64], u: &mut [f64], coord: usize) {
        // vertex of each mode's parabola along this coordinate brackets the
        // minimum of their upper envelope
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for j in 0..self.a.len() {
            let d: Vec<f64> = (0..self.n).map(|r| self.b[j][r * self.m + coord]).collect();
            let d_sq: f64 = d.iter().map(|c| c * c).sum();
            if d_sq == 0.0 {
                continue;
            }
            let mut base = u.to_vec();
            base[coord] = 0.0;
            let r = self.residual(j, x, &base);
            let vertex = -r.iter().zip(&d).map(|(ri, di)| ri * di).sum::<f64>() / d_sq;
            lo = lo.min(vertex);
            hi = hi.max(vertex);
        }
        if lo > hi {
            return;
        }
        let (mut lo, mut hi) = (lo - 1.0, hi + 1.0);
        let eval = |u: &mut [f64], s: f64| {
            u[coord] = s;
            self.worst_next_sq(x, u)
        };
        for _ in 0..200 {
            let third = (hi - lo) / 3.0;
            let (m1, m2) = (lo + third, hi - third);
            if eval(u, m1) <= eval(u, m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        u[coord] = (lo + hi) / 2.0;
    }
}
