//! The stabilizability ladder `E_0 ⊆ E_1 ⊆ …` and its fixed point.
//!
//! `E_{k+1}` collects the states that some admissible input steers into `E_k`
//! in one step, whatever the active mode: per-mode inputs in the
//! mode-dependent case, one common input in the mode-independent case.
//! Starting from `E_0 = {0}`, the sequence grows strictly until it fixes at
//! an index `p ≤ n`; the system is stabilizable to zero in `p` steps from
//! exactly the states in the fixed point `E_p`.
//!
//! Alongside the subspaces, the build records a basis `Q_p` (grown column by
//! column as the ladder climbs) and per-column inputs `U_p` steering each
//! basis column one level down. Those are the raw material for gain
//! synthesis.

use alloc::vec;
use alloc::vec::Vec;

use crate::matrix::{Matrix, SolvePolicy};
use crate::subspace::Subspace;
use crate::system::SwitchedSystem;

/// Whether the feedback may observe the active mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FeedbackKind {
    /// One gain per mode, `u = K_j x`.
    ModeDependent,
    /// A single gain for every mode, `u = K x`.
    ModeIndependent,
}

/// A matrix per mode, or one matrix shared by all modes.
///
/// Used both for input schedules (`m × e` blocks) and for gains (`m × n`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModeMatrices {
    PerMode(Vec<Matrix>),
    Shared(Matrix),
}

impl ModeMatrices {
    pub fn kind(&self) -> FeedbackKind {
        match self {
            ModeMatrices::PerMode(_) => FeedbackKind::ModeDependent,
            ModeMatrices::Shared(_) => FeedbackKind::ModeIndependent,
        }
    }

    /// The matrix applied in mode `j`.
    pub fn for_mode(&self, j: usize) -> &Matrix {
        match self {
            ModeMatrices::PerMode(ms) => &ms[j],
            ModeMatrices::Shared(m) => m,
        }
    }

    /// Zero matrices of the given shape, one per mode or shared.
    pub fn zeros(kind: FeedbackKind, rows: usize, cols: usize, modes: usize) -> Self {
        match kind {
            FeedbackKind::ModeDependent => {
                ModeMatrices::PerMode(vec![Matrix::zeros(rows, cols); modes])
            }
            FeedbackKind::ModeIndependent => ModeMatrices::Shared(Matrix::zeros(rows, cols)),
        }
    }

    fn concat_cols(&self, right: &ModeMatrices) -> ModeMatrices {
        match (self, right) {
            (ModeMatrices::PerMode(a), ModeMatrices::PerMode(b)) => {
                assert_eq!(a.len(), b.len());
                ModeMatrices::PerMode(
                    a.iter().zip(b).map(|(x, y)| Matrix::hstack(&[x, y])).collect(),
                )
            }
            (ModeMatrices::Shared(a), ModeMatrices::Shared(b)) => {
                ModeMatrices::Shared(Matrix::hstack(&[a, b]))
            }
            _ => panic!("mixed per-mode and shared blocks"),
        }
    }

    /// Applies `f` to each contained matrix.
    pub fn map(&self, mut f: impl FnMut(&Matrix) -> Matrix) -> ModeMatrices {
        match self {
            ModeMatrices::PerMode(ms) => ModeMatrices::PerMode(ms.iter().map(|m| f(m)).collect()),
            ModeMatrices::Shared(m) => ModeMatrices::Shared(f(m)),
        }
    }
}

/// One level of the ladder.
#[derive(Clone, Debug, PartialEq)]
pub struct LadderStep {
    /// Level index; `steps[k].k == k`.
    pub k: usize,
    /// The subspace `E_k`.
    pub subspace: Subspace,
    /// Basis columns appended when climbing from `E_{k-1}` to `E_k`
    /// (`n × (e_k - e_{k-1})`; empty at level 0).
    pub new_basis: Matrix,
    /// Inputs for the appended columns: column `i` steers `new_basis` column
    /// `i` into `E_{k-1}`, i.e. `A_j q + B_j u ∈ E_{k-1}`.
    pub new_inputs: ModeMatrices,
}

/// The fully grown ladder, ending at its fixed point.
#[derive(Clone, Debug, PartialEq)]
pub struct Ladder {
    pub kind: FeedbackKind,
    /// Levels `0..=p`; level 0 is always `{0}`.
    pub steps: Vec<LadderStep>,
    /// Accumulated basis `Q_p` of the fixed point (`n × e_p`, full column
    /// rank, ordered by the level at which each column appeared).
    pub basis: Matrix,
    /// Accumulated inputs `U_p` (`m × e_p`), aligned with `basis` columns.
    pub inputs: ModeMatrices,
}

impl Ladder {
    /// Grows the ladder for `sys` until it reaches its fixed point.
    pub fn build(sys: &SwitchedSystem, kind: FeedbackKind) -> Ladder {
        Ladder::build_with(sys, kind, SolvePolicy::default())
    }

    /// Same as [`Ladder::build`] with an explicit tie-breaking policy for the
    /// under-determined input solves. The subspaces do not depend on the
    /// policy, only the recorded inputs (and hence synthesized gains) may.
    pub fn build_with(sys: &SwitchedSystem, kind: FeedbackKind, policy: SolvePolicy) -> Ladder {
        let n = sys.state_dim();
        let m = sys.input_dim();
        let modes = sys.mode_count();
        let mut steps = vec![LadderStep {
            k: 0,
            subspace: Subspace::zero(n),
            new_basis: Matrix::zeros(n, 0),
            new_inputs: ModeMatrices::zeros(kind, m, 0, modes),
        }];
        let mut basis = Matrix::zeros(n, 0);
        let mut inputs = ModeMatrices::zeros(kind, m, 0, modes);
        loop {
            let cur = steps.last().expect("level 0 present").subspace.clone();
            let next = next_level(sys, kind, &cur);
            if next == cur {
                break;
            }
            assert!(cur.is_subspace_of(&next), "ladder must grow monotonically");
            // keep the canonical basis columns of `next` that are new
            // directions relative to the columns collected so far
            let mut grown = basis.clone();
            let mut fresh = Vec::new();
            for j in 0..next.dim() {
                let cand = Matrix::hstack(&[&grown, &Matrix::from_col(next.basis().col(j))]);
                if cand.rank() == grown.cols() + 1 {
                    grown = cand;
                    fresh.push(j);
                }
            }
            assert!(!fresh.is_empty(), "strict growth below the fixed point");
            assert_eq!(grown.cols(), next.dim(), "extension must span the next level");
            let new_basis = next.basis().select_cols(&fresh);
            let new_inputs = solve_step_inputs(sys, kind, policy, &basis, &new_basis, &cur);
            basis = grown;
            inputs = inputs.concat_cols(&new_inputs);
            steps.push(LadderStep {
                k: steps.len(),
                subspace: next,
                new_basis,
                new_inputs,
            });
            assert!(steps.len() <= n + 1, "ladder cannot outgrow the ambient dimension");
        }
        Ladder { kind, steps, basis, inputs }
    }

    /// Index `p` at which the ladder fixes.
    pub fn fixed_point_index(&self) -> usize {
        self.steps.len() - 1
    }

    /// The fixed point `E_p`.
    pub fn fixed_point(&self) -> &Subspace {
        &self.steps.last().expect("level 0 present").subspace
    }

    pub fn fixed_point_dim(&self) -> usize {
        self.fixed_point().dim()
    }

    /// Dimensions `[dim E_0, …, dim E_p]`.
    pub fn level_dims(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.subspace.dim()).collect()
    }

    /// `E_k`, saturating at the fixed point for `k > p`.
    pub fn level(&self, k: usize) -> &Subspace {
        let k = k.min(self.fixed_point_index());
        &self.steps[k].subspace
    }

    /// First `dim E_k` columns of the accumulated basis (they span `E_k`).
    pub fn basis_through(&self, k: usize) -> Matrix {
        let e = self.level(k).dim();
        self.basis.submatrix(0, self.basis.rows(), 0, e)
    }
}

/// Convenience wrapper: ladder under mode-dependent feedback.
pub fn md_ladder(sys: &SwitchedSystem) -> Ladder {
    Ladder::build(sys, FeedbackKind::ModeDependent)
}

/// Convenience wrapper: ladder under mode-independent feedback.
pub fn mi_ladder(sys: &SwitchedSystem) -> Ladder {
    Ladder::build(sys, FeedbackKind::ModeIndependent)
}

fn next_level(sys: &SwitchedSystem, kind: FeedbackKind, cur: &Subspace) -> Subspace {
    match kind {
        FeedbackKind::ModeDependent => {
            let mut acc: Option<Subspace> = None;
            for j in 0..sys.mode_count() {
                let target = cur.sum(&Subspace::image_of(sys.b(j)));
                let pre = target.preimage_under(sys.a(j));
                acc = Some(match acc {
                    None => pre,
                    Some(s) => s.intersect(&pre),
                });
            }
            acc.expect("at least one mode")
        }
        FeedbackKind::ModeIndependent => {
            // x belongs to the next level iff one common input u and block
            // coefficients y solve A_j x + B_j u = Q_k y_j for every mode,
            // i.e. (x, u, y) is in the kernel of [Ā | B̄ | -diag(Q_k, …)]
            let n = sys.state_dim();
            let modes = sys.mode_count();
            let blocks: Vec<&Matrix> = (0..modes).map(|_| cur.basis()).collect();
            let diag = Matrix::block_diag(&blocks).neg();
            let stacked = Matrix::hstack(&[&sys.stacked_a(), &sys.stacked_b(), &diag]);
            let kernel = stacked.kernel_matrix();
            let x_part = kernel.submatrix(0, n, 0, kernel.cols());
            Subspace::spanned_by(&x_part)
        }
    }
}

/// Inputs steering each new basis column into the previous level.
///
/// Solves `A_j q + B_j u = (prior basis)·y` for `(u, y)` with the given
/// policy; the `y` block is only a certificate that the image lands in the
/// previous level and is dropped after the residual check.
fn solve_step_inputs(
    sys: &SwitchedSystem,
    kind: FeedbackKind,
    policy: SolvePolicy,
    prior: &Matrix,
    new_basis: &Matrix,
    prev_level: &Subspace,
) -> ModeMatrices {
    let m = sys.input_dim();
    let fresh = new_basis.cols();
    let out = match kind {
        FeedbackKind::ModeDependent => {
            let mut per = Vec::with_capacity(sys.mode_count());
            for j in 0..sys.mode_count() {
                let lhs = Matrix::hstack(&[&sys.b(j).neg(), prior]);
                let rhs = sys.a(j).mul(new_basis);
                let sol = lhs
                    .solve_particular(&rhs, policy)
                    .expect("new ladder columns are steerable by construction");
                per.push(sol.submatrix(0, m, 0, fresh));
            }
            ModeMatrices::PerMode(per)
        }
        FeedbackKind::ModeIndependent => {
            let blocks: Vec<&Matrix> = (0..sys.mode_count()).map(|_| prior).collect();
            let lhs = Matrix::hstack(&[&sys.stacked_b().neg(), &Matrix::block_diag(&blocks)]);
            let rhs = sys.stacked_a().mul(new_basis);
            let sol = lhs
                .solve_particular(&rhs, policy)
                .expect("new ladder columns are steerable by construction");
            ModeMatrices::Shared(sol.submatrix(0, m, 0, fresh))
        }
    };
    for c in 0..fresh {
        let q = new_basis.col(c);
        for j in 0..sys.mode_count() {
            let u = out.for_mode(j).col(c);
            let mut v = sys.a(j).mul_vec(&q);
            let bu = sys.b(j).mul_vec(&u);
            for (vi, bi) in v.iter_mut().zip(bu) {
                *vi += bi;
            }
            assert!(prev_level.contains(&v), "steered column must land one level down");
        }
    }
    out
}
