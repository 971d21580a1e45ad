//! Gain synthesis from a ladder, stabilizability verdicts, certification of
//! arbitrary gains, and redundant-input reduction.

use alloc::vec::Vec;
use core::fmt;

use crate::ladder::{FeedbackKind, Ladder, ModeMatrices};
use crate::matrix::{Matrix, SolvePolicy};
use crate::subspace::Subspace;
use crate::system::SwitchedSystem;

/// Gains produced by [`synthesize_gains`], together with the ladder they
/// came from. Satisfies `K_j · Q_p = U_{p,j}` exactly, so every basis column
/// of the fixed point is steered one level down by the closed loop.
#[derive(Clone, Debug, PartialEq)]
pub struct GainSet {
    pub gains: ModeMatrices,
    pub ladder: Ladder,
}

/// The ladder fixed its point at `{0}`: no direction can be steered to zero,
/// so there is nothing to synthesize gains for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NoStabilizableSubspace;

impl fmt::Display for NoStabilizableSubspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ladder fixed point is the zero subspace; no stabilizable directions")
    }
}

impl core::error::Error for NoStabilizableSubspace {}

/// Builds gains from the ladder's recorded basis and inputs via
/// `K = U_p (Q_pᵀ Q_p)⁻¹ Q_pᵀ`.
///
/// On the fixed point the action of `K` is pinned to the recorded inputs; off
/// the fixed point this particular right inverse acts through the orthogonal
/// projection, but any completion would do.
pub fn synthesize_gains(ladder: &Ladder) -> Result<GainSet, NoStabilizableSubspace> {
    let q = &ladder.basis;
    if q.cols() == 0 && q.rows() > 0 {
        return Err(NoStabilizableSubspace);
    }
    let gram = q.transpose().mul(q);
    let proj = gram
        .invert()
        .expect("Gram matrix of a full-column-rank basis is invertible")
        .mul(&q.transpose());
    let gains = ladder.inputs.map(|u| u.mul(&proj));
    // the defining property of the gains, exact by construction
    match &gains {
        ModeMatrices::PerMode(ks) => {
            for (k, u) in ks.iter().zip(match &ladder.inputs {
                ModeMatrices::PerMode(us) => us.iter(),
                ModeMatrices::Shared(_) => unreachable!("ladder inputs match their kind"),
            }) {
                assert_eq!(&k.mul(q), u, "gain must reproduce the recorded inputs on the basis");
            }
        }
        ModeMatrices::Shared(k) => {
            let ModeMatrices::Shared(u) = &ladder.inputs else {
                unreachable!("ladder inputs match their kind")
            };
            assert_eq!(&k.mul(q), u, "gain must reproduce the recorded inputs on the basis");
        }
    }
    Ok(GainSet { gains, ladder: ladder.clone() })
}

/// Outcome of the fixed-horizon stabilizability decision.
#[derive(Clone, Debug, PartialEq)]
pub enum FtsVerdict {
    /// Every state reaches exactly zero within `horizon` steps under the
    /// synthesized gains, whatever the switching sequence.
    Stabilizable { horizon: usize, gains: GainSet },
    /// The ladder stalled strictly below the full space; states outside the
    /// blocking subspace cannot be steered to zero in uniform finite time.
    NotStabilizable { ladder: Ladder },
}

impl FtsVerdict {
    pub fn is_fts(&self) -> bool {
        matches!(self, FtsVerdict::Stabilizable { .. })
    }

    pub fn horizon(&self) -> Option<usize> {
        match self {
            FtsVerdict::Stabilizable { horizon, .. } => Some(*horizon),
            FtsVerdict::NotStabilizable { .. } => None,
        }
    }

    pub fn gains(&self) -> Option<&GainSet> {
        match self {
            FtsVerdict::Stabilizable { gains, .. } => Some(gains),
            FtsVerdict::NotStabilizable { .. } => None,
        }
    }

    pub fn ladder(&self) -> &Ladder {
        match self {
            FtsVerdict::Stabilizable { gains, .. } => &gains.ladder,
            FtsVerdict::NotStabilizable { ladder } => ladder,
        }
    }

    /// The fixed point when it falls short of the full space.
    pub fn blocking_subspace(&self) -> Option<&Subspace> {
        match self {
            FtsVerdict::Stabilizable { .. } => None,
            FtsVerdict::NotStabilizable { ladder } => Some(ladder.fixed_point()),
        }
    }
}

/// Decides fixed-horizon stabilizability for the requested feedback kind.
pub fn decide_fts(sys: &SwitchedSystem, kind: FeedbackKind) -> FtsVerdict {
    decide_fts_with(sys, kind, SolvePolicy::default())
}

pub fn decide_fts_with(sys: &SwitchedSystem, kind: FeedbackKind, policy: SolvePolicy) -> FtsVerdict {
    let ladder = Ladder::build_with(sys, kind, policy);
    if ladder.fixed_point().is_full() {
        let horizon = ladder.fixed_point_index();
        let gains = synthesize_gains(&ladder)
            .expect("full fixed point of a nonzero-dimensional space has a basis");
        FtsVerdict::Stabilizable { horizon, gains }
    } else {
        FtsVerdict::NotStabilizable { ladder }
    }
}

/// A failed descent check: closed-loop mode `mode` does not map basis column
/// `column` of level `level` into level `level - 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CertViolation {
    pub level: usize,
    pub mode: usize,
    pub column: usize,
}

/// Result of checking gains against a ladder. Violations are data, not
/// errors; an empty list means the gains drive every level one step down.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertReport {
    pub checks: usize,
    pub violations: Vec<CertViolation>,
}

impl CertReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that `(A_j + B_j K_j)` maps every recorded basis column of each
/// ladder level into the level below, for every mode.
///
/// The gains may come from anywhere (synthesis, a file, a guess) and may be
/// shared or per-mode independently of the ladder's kind.
pub fn certify_gains(sys: &SwitchedSystem, gains: &ModeMatrices, ladder: &Ladder) -> CertReport {
    let mut checks = 0;
    let mut violations = Vec::new();
    let closed: Vec<Matrix> =
        (0..sys.mode_count()).map(|j| sys.closed_loop(j, gains.for_mode(j))).collect();
    for level in 1..=ladder.fixed_point_index() {
        let cols = ladder.level(level).dim();
        let below = ladder.level(level - 1);
        for column in 0..cols {
            let q = ladder.basis.col(column);
            for (mode, c) in closed.iter().enumerate() {
                checks += 1;
                if !below.contains(&c.mul_vec(&q)) {
                    violations.push(CertViolation { level, mode, column });
                }
            }
        }
    }
    CertReport { checks, violations }
}

/// Drops redundant input directions.
///
/// Returns a system with `B̃_j = B_j T` where `T` selects a maximal
/// independent set of columns of the stacked input matrix, plus `T` itself.
/// When the stacked input matrix already has full column rank, `T` is the
/// identity and the system is returned unchanged.
pub fn reduce_inputs(sys: &SwitchedSystem) -> (SwitchedSystem, Matrix) {
    let m = sys.input_dim();
    let (_, pivots) = sys.stacked_b().rref();
    let t = Matrix::identity(m).select_cols(&pivots);
    let reduced = SwitchedSystem::new(
        (0..sys.mode_count()).map(|j| sys.a(j).clone()).collect(),
        (0..sys.mode_count()).map(|j| sys.b(j).mul(&t)).collect(),
    )
    .expect("reduction preserves shape");
    (reduced, t)
}
