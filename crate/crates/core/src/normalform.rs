//! Block-triangular decomposition of the closed loop: a coordinate change
//! splitting the state into a part that dies in fixed time (`y`) and a
//! residual part (`ξ`) with no stabilizable directions of its own.

use alloc::vec::Vec;
use core::fmt;

use crate::ladder::{FeedbackKind, Ladder, ModeMatrices};
use crate::matrix::Matrix;
use crate::synthesis::synthesize_gains;
use crate::system::SwitchedSystem;

/// One mode of the transformed closed loop
/// `T⁻¹(A_j + B_j K_j)T = [a_yy a_yxi; 0 a_xixi]`, `T⁻¹B_j = [b_y; b_xi]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeBlocks {
    pub a_yy: Matrix,
    pub a_yxi: Matrix,
    pub a_xixi: Matrix,
    pub b_y: Matrix,
    pub b_xi: Matrix,
}

/// The decomposition. States transform as `x = Tz`; the first `stable_dim`
/// columns of `transform` span the largest stabilizable subspace, and the
/// stored blocks reassemble exactly to the transformed closed loop.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalForm {
    pub kind: FeedbackKind,
    pub system: SwitchedSystem,
    pub stable_dim: usize,
    /// Ladder fixed-point index: the y-part of any state is annihilated
    /// within this many steps.
    pub horizon: usize,
    pub transform: Matrix,
    pub transform_inv: Matrix,
    pub base_gains: ModeMatrices,
    pub blocks: Vec<ModeBlocks>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormalFormError {
    /// The supplied coordinate change is not invertible.
    SingularTransform,
    /// The split is not invariant: this mode's closed loop maps the span of
    /// the leading columns outside itself.
    ResidualCoupling { mode: usize },
}

impl fmt::Display for NormalFormError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormalFormError::SingularTransform => write!(f, "transform matrix is singular"),
            NormalFormError::ResidualCoupling { mode } => {
                write!(f, "closed loop of mode {mode} does not leave the leading block invariant")
            }
        }
    }
}

impl core::error::Error for NormalFormError {}

/// Decomposes with synthesized gains and a deterministic basis extension of
/// the ladder fixed point. Degenerate splits (`stable_dim` 0 or n) come back
/// with zero-sized blocks.
pub fn decompose(sys: &SwitchedSystem, kind: FeedbackKind) -> NormalForm {
    let ladder = Ladder::build(sys, kind);
    let gains = match synthesize_gains(&ladder) {
        Ok(set) => set.gains,
        // no stabilizable directions: keep the plant as-is under zero feedback
        Err(_) => ModeMatrices::zeros(kind, sys.input_dim(), sys.state_dim(), sys.mode_count()),
    };
    let transform = ladder.fixed_point().extend_to_basis();
    build(sys, kind, &gains, &transform, &ladder)
        .expect("synthesized gains leave the ladder fixed point invariant")
}

/// Decomposes with caller-supplied gains and coordinates. The first
/// `stable_dim` columns of `transform` must span a subspace left invariant
/// by every closed-loop mode, where `stable_dim` is the fixed-point
/// dimension of the ladder for `kind`.
pub fn decompose_with(
    sys: &SwitchedSystem,
    kind: FeedbackKind,
    gains: &ModeMatrices,
    transform: &Matrix,
) -> Result<NormalForm, NormalFormError> {
    let ladder = Ladder::build(sys, kind);
    build(sys, kind, gains, transform, &ladder)
}

fn build(
    sys: &SwitchedSystem,
    kind: FeedbackKind,
    gains: &ModeMatrices,
    transform: &Matrix,
    ladder: &Ladder,
) -> Result<NormalForm, NormalFormError> {
    let n = sys.state_dim();
    assert_eq!(transform.rows(), n, "transform must act on the state space");
    assert!(transform.is_square(), "transform must be square");
    let transform_inv =
        transform.invert().map_err(|_| NormalFormError::SingularTransform)?;
    let stable_dim = ladder.fixed_point_dim();
    let mut blocks = Vec::with_capacity(sys.mode_count());
    for j in 0..sys.mode_count() {
        let closed = sys.closed_loop(j, gains.for_mode(j));
        let z = transform_inv.mul(&closed).mul(transform);
        if !z.submatrix(stable_dim, n, 0, stable_dim).is_zero() {
            return Err(NormalFormError::ResidualCoupling { mode: j });
        }
        let b = transform_inv.mul(sys.b(j));
        blocks.push(ModeBlocks {
            a_yy: z.submatrix(0, stable_dim, 0, stable_dim),
            a_yxi: z.submatrix(0, stable_dim, stable_dim, n),
            a_xixi: z.submatrix(stable_dim, n, stable_dim, n),
            b_y: b.submatrix(0, stable_dim, 0, sys.input_dim()),
            b_xi: b.submatrix(stable_dim, n, 0, sys.input_dim()),
        });
    }
    Ok(NormalForm {
        kind,
        system: sys.clone(),
        stable_dim,
        horizon: ladder.fixed_point_index(),
        transform: transform.clone(),
        transform_inv,
        base_gains: gains.clone(),
        blocks,
    })
}

impl NormalForm {
    pub fn residual_dim(&self) -> usize {
        self.system.state_dim() - self.stable_dim
    }

    /// The transformed closed-loop matrix of one mode, reassembled from the
    /// stored blocks with the zero bottom-left corner made explicit.
    pub fn reassemble(&self, j: usize) -> Matrix {
        let bl = &self.blocks[j];
        let top = Matrix::hstack(&[&bl.a_yy, &bl.a_yxi]);
        let bottom =
            Matrix::hstack(&[&Matrix::zeros(self.residual_dim(), self.stable_dim), &bl.a_xixi]);
        Matrix::vstack(&[&top, &bottom])
    }

    /// The transformed input matrix `T⁻¹B_j`.
    pub fn transformed_input(&self, j: usize) -> Matrix {
        Matrix::vstack(&[&self.blocks[j].b_y, &self.blocks[j].b_xi])
    }
}

/// The residual subsystem `ξ⁺ = a_xixi ξ + b_xi v`.
pub fn extract_xi(nf: &NormalForm) -> SwitchedSystem {
    SwitchedSystem::new(
        nf.blocks.iter().map(|b| b.a_xixi.clone()).collect(),
        nf.blocks.iter().map(|b| b.b_xi.clone()).collect(),
    )
    .expect("blocks of a normal form are shape-consistent")
}

/// Independent re-check of a decomposition's claims.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalFormReport {
    /// Modes whose recomputed closed loop has a nonzero bottom-left corner.
    pub coupling_violations: Vec<usize>,
    /// Modes whose stored blocks disagree with the recomputed transform.
    pub block_mismatches: Vec<usize>,
    /// Number of length-`horizon` products of y-blocks that are not zero.
    pub nonzero_products: u128,
    pub first_nonzero_product: Option<Vec<usize>>,
    pub products_checked: u128,
    /// Fixed-point dimension of the residual subsystem's own ladder; zero
    /// means no stabilizable direction was left behind.
    pub xi_fixed_point_dim: usize,
}

impl NormalFormReport {
    pub fn passed(&self) -> bool {
        self.coupling_violations.is_empty()
            && self.block_mismatches.is_empty()
            && self.nonzero_products == 0
            && self.xi_fixed_point_dim == 0
    }
}

/// Recomputes the transformed closed loop from the stored system, checks the
/// stored blocks against it, multiplies out every length-`horizon` product of
/// y-blocks, and runs the ladder on the residual subsystem.
pub fn verify_normal_form(nf: &NormalForm) -> NormalFormReport {
    let n = nf.system.state_dim();
    let stable = nf.stable_dim;
    let mut coupling_violations = Vec::new();
    let mut block_mismatches = Vec::new();
    for j in 0..nf.system.mode_count() {
        let closed = nf.system.closed_loop(j, nf.base_gains.for_mode(j));
        let z = nf.transform_inv.mul(&closed).mul(&nf.transform);
        if !z.submatrix(stable, n, 0, stable).is_zero() {
            coupling_violations.push(j);
        }
        if z != nf.reassemble(j)
            || nf.transform_inv.mul(nf.system.b(j)) != nf.transformed_input(j)
        {
            block_mismatches.push(j);
        }
    }
    let (products_checked, nonzero_products, first_nonzero_product) = check_y_products(nf);
    let xi_ladder = Ladder::build(&extract_xi(nf), nf.kind);
    NormalFormReport {
        coupling_violations,
        block_mismatches,
        nonzero_products,
        first_nonzero_product,
        products_checked,
        xi_fixed_point_dim: xi_ladder.fixed_point_dim(),
    }
}

fn check_y_products(nf: &NormalForm) -> (u128, u128, Option<Vec<usize>>) {
    let m = nf.system.mode_count();
    let p = nf.horizon;
    let mut sigma = alloc::vec![0usize; p];
    let mut checked = 0u128;
    let mut nonzero = 0u128;
    let mut first = None;
    'sequences: loop {
        checked += 1;
        let mut product = Matrix::identity(nf.stable_dim);
        for &j in &sigma {
            product = nf.blocks[j].a_yy.mul(&product);
        }
        if !product.is_zero() {
            nonzero += 1;
            if first.is_none() {
                first = Some(sigma.clone());
            }
        }
        let mut i = p;
        loop {
            if i == 0 {
                break 'sequences;
            }
            i -= 1;
            sigma[i] += 1;
            if sigma[i] < m {
                break;
            }
            sigma[i] = 0;
        }
    }
    (checked, nonzero, first)
}
