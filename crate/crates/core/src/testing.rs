//! Shared fixtures for unit tests: the bundled 3-state, 2-mode demo system
//! and its hand-written reference gains.

use alloc::vec;

use crate::ladder::ModeMatrices;
use crate::matrix::Matrix;
use crate::rational::{rat, ratio};
use crate::system::SwitchedSystem;

/// 3-state, 2-mode system that is stabilizable in 3 steps with per-mode
/// gains but only on a 2-dimensional subspace with a shared gain.
pub(crate) fn demo_system() -> SwitchedSystem {
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
    let b1 = Matrix::from_int_rows(&[&[-1], &[0], &[1]]);
    let b2 = Matrix::from_int_rows(&[&[1], &[0], &[-1]]);
    SwitchedSystem::new(vec![a1, a2], vec![b1, b2]).expect("demo system is well shaped")
}

/// Hand-written per-mode reference gains for the demo system, as listed in
/// the bundled data files. Note: the mode-1 entry does NOT annihilate in 3
/// steps (its closed loop keeps an eigenvalue -1/2); tests use it to
/// exercise failing certificates.
pub(crate) fn demo_gains_md_reference() -> ModeMatrices {
    ModeMatrices::PerMode(vec![
        Matrix::from_rows(vec![vec![rat(0), rat(-1), ratio(-1, 2)]]),
        Matrix::from_rows(vec![vec![rat(0), rat(-1), ratio(1, 2)]]),
    ])
}

/// Shared reference gain for the demo system; annihilates the 2-dimensional
/// fixed point in 2 steps but cannot reach all of ℚ³.
pub(crate) fn demo_gain_mi() -> ModeMatrices {
    ModeMatrices::Shared(Matrix::from_int_rows(&[&[0, -1, 0]]))
}

/// The hand-picked coordinate change used in the demo decomposition
/// (`z = P x`; its inverse fits the crate's `x = T z` convention).
pub(crate) fn demo_transform_p() -> Matrix {
    Matrix::from_int_rows(&[&[1, 2, 1], &[1, 1, 1], &[0, 0, 1]])
}
