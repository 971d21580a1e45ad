//! Switched linear system container and shape validation.

use alloc::vec::Vec;
use core::fmt;

use num_traits::Signed;

use crate::matrix::Matrix;
use crate::rational::Rational;

/// Discrete-time switched linear system `x(t+1) = A_j x(t) + B_j u(t)` where
/// the active mode `j` is chosen externally at every step.
///
/// Shapes are validated once at construction: all `A_j` are `n×n`, all `B_j`
/// are `n×m`, and there is at least one mode. `n = 0` and `m = 0` are legal
/// (empty residual subsystems, input-free systems).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SwitchedSystem {
    a: Vec<Matrix>,
    b: Vec<Matrix>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SystemShapeError {
    NoModes,
    ModeCountMismatch { a_modes: usize, b_modes: usize },
    StateMatrixNotSquare { mode: usize, rows: usize, cols: usize },
    StateDimMismatch { mode: usize, expected: usize, found: usize },
    InputDimMismatch { mode: usize, expected: usize, found: usize },
}

impl fmt::Display for SystemShapeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SystemShapeError::NoModes => write!(f, "system has no modes"),
            SystemShapeError::ModeCountMismatch { a_modes, b_modes } => {
                write!(f, "{a_modes} state matrices but {b_modes} input matrices")
            }
            SystemShapeError::StateMatrixNotSquare { mode, rows, cols } => {
                write!(f, "state matrix of mode {mode} is {rows}x{cols}, not square")
            }
            SystemShapeError::StateDimMismatch { mode, expected, found } => {
                write!(f, "mode {mode} has state dimension {found}, expected {expected}")
            }
            SystemShapeError::InputDimMismatch { mode, expected, found } => {
                write!(f, "mode {mode} has input dimension {found}, expected {expected}")
            }
        }
    }
}

impl core::error::Error for SystemShapeError {}

impl SwitchedSystem {
    pub fn new(a: Vec<Matrix>, b: Vec<Matrix>) -> Result<Self, SystemShapeError> {
        if a.is_empty() {
            return Err(SystemShapeError::NoModes);
        }
        if a.len() != b.len() {
            return Err(SystemShapeError::ModeCountMismatch { a_modes: a.len(), b_modes: b.len() });
        }
        let n = a[0].rows();
        let m = b[0].cols();
        for (j, aj) in a.iter().enumerate() {
            if !aj.is_square() {
                return Err(SystemShapeError::StateMatrixNotSquare {
                    mode: j,
                    rows: aj.rows(),
                    cols: aj.cols(),
                });
            }
            if aj.rows() != n {
                return Err(SystemShapeError::StateDimMismatch { mode: j, expected: n, found: aj.rows() });
            }
        }
        for (j, bj) in b.iter().enumerate() {
            if bj.rows() != n {
                return Err(SystemShapeError::StateDimMismatch { mode: j, expected: n, found: bj.rows() });
            }
            if bj.cols() != m {
                return Err(SystemShapeError::InputDimMismatch { mode: j, expected: m, found: bj.cols() });
            }
        }
        Ok(SwitchedSystem { a, b })
    }

    pub fn state_dim(&self) -> usize {
        self.a[0].rows()
    }

    pub fn input_dim(&self) -> usize {
        self.b[0].cols()
    }

    pub fn mode_count(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self, j: usize) -> &Matrix {
        assert!(j < self.mode_count(), "mode index {j} out of range");
        &self.a[j]
    }

    pub fn b(&self, j: usize) -> &Matrix {
        assert!(j < self.mode_count(), "mode index {j} out of range");
        &self.b[j]
    }

    /// Closed-loop state matrix `A_j + B_j K` for a gain applied in mode `j`.
    pub fn closed_loop(&self, j: usize, k: &Matrix) -> Matrix {
        assert_eq!(k.rows(), self.input_dim(), "gain has wrong input dimension");
        assert_eq!(k.cols(), self.state_dim(), "gain has wrong state dimension");
        self.a(j).add(&self.b(j).mul(k))
    }

    /// All state matrices stacked vertically (`nM × n`).
    pub fn stacked_a(&self) -> Matrix {
        let refs: Vec<&Matrix> = self.a.iter().collect();
        Matrix::vstack(&refs)
    }

    /// All input matrices stacked vertically (`nM × m`).
    pub fn stacked_b(&self) -> Matrix {
        let refs: Vec<&Matrix> = self.b.iter().collect();
        Matrix::vstack(&refs)
    }

    /// Same modes with every state matrix divided by `rho` (inputs unchanged).
    ///
    /// A feedback achieves decay rate `rho` for the original system exactly
    /// when the scaled system is fixed-horizon stabilizable by the same
    /// feedback structure, which is what makes this rescaling useful.
    pub fn scaled(&self, rho: &Rational) -> SwitchedSystem {
        assert!(rho.is_positive(), "scaling rate must be positive");
        let inv = rho.recip();
        SwitchedSystem {
            a: self.a.iter().map(|m| m.scale(&inv)).collect(),
            b: self.b.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, ratio};
    use alloc::vec;

    #[test]
    fn construction_validates_shapes() {
        let a = vec![Matrix::identity(2)];
        let b = vec![Matrix::zeros(3, 1)];
        assert_eq!(
            SwitchedSystem::new(a, b),
            Err(SystemShapeError::StateDimMismatch { mode: 0, expected: 2, found: 3 })
        );
        assert_eq!(SwitchedSystem::new(vec![], vec![]), Err(SystemShapeError::NoModes));
        let ok = SwitchedSystem::new(vec![Matrix::identity(2)], vec![Matrix::zeros(2, 0)]).unwrap();
        assert_eq!((ok.state_dim(), ok.input_dim(), ok.mode_count()), (2, 0, 1));
    }

    #[test]
    fn scaling_divides_state_matrices_only() {
        let sys = SwitchedSystem::new(
            vec![Matrix::from_int_rows(&[&[1, 2], &[0, 1]])],
            vec![Matrix::from_int_rows(&[&[1], &[1]])],
        )
        .unwrap();
        let scaled = sys.scaled(&ratio(1, 2));
        assert_eq!(scaled.a(0), &Matrix::from_int_rows(&[&[2, 4], &[0, 2]]));
        assert_eq!(scaled.b(0), sys.b(0));
    }

    #[test]
    fn closed_loop_applies_the_gain() {
        let sys = SwitchedSystem::new(
            vec![Matrix::from_int_rows(&[&[0, 1], &[0, 0]])],
            vec![Matrix::from_int_rows(&[&[0], &[1]])],
        )
        .unwrap();
        let k = Matrix::from_rows(vec![vec![rat(1), ratio(1, 2)]]);
        assert_eq!(
            sys.closed_loop(0, &k),
            Matrix::from_rows(vec![vec![rat(0), rat(1)], vec![rat(1), ratio(1, 2)]])
        );
    }
}
