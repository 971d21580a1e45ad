//! Dense rational matrices and exact Gaussian elimination.
//!
//! Matrices are row-major over [`Rational`] entries. Zero-row and zero-column
//! shapes are legal throughout; they show up as empty bases, empty input
//! blocks and empty residual subsystems, so every operation handles them.
//!
//! Shape mismatches are programming errors and panic; data-dependent failures
//! (singular inverse, infeasible solve) are returned as values.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Index, IndexMut, Mul, Sub};

use num_traits::{One, Zero};

use crate::rational::Rational;

/// Choice of particular solution when a linear system is under-determined.
///
/// Both policies are deterministic; verdicts downstream must not depend on
/// which one is used (covered by the property suite).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SolvePolicy {
    /// Free variables are set to zero.
    #[default]
    FreeZero,
    /// Free variables are set to one.
    FreeOne,
}

/// Returned by [`Matrix::invert`] on a non-invertible input.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Singular;

impl fmt::Display for Singular {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "matrix is singular")
    }
}

impl core::error::Error for Singular {}

#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    /// Builds from row vectors. Panics if the rows are ragged.
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for (i, row) in rows.into_iter().enumerate() {
            assert_eq!(row.len(), c, "row {i} has wrong length");
            data.extend(row);
        }
        Matrix { rows: r, cols: c, data }
    }

    /// Integer-entry convenience constructor, mostly for tests and examples.
    pub fn from_int_rows(rows: &[&[i64]]) -> Self {
        Matrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| crate::rational::rat(v)).collect())
                .collect(),
        )
    }

    /// Single-column matrix from a vector.
    pub fn from_col(col: Vec<Rational>) -> Self {
        let rows = col.len();
        Matrix { rows, cols: 1, data: col }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn col(&self, j: usize) -> Vec<Rational> {
        assert!(j < self.cols, "column {j} out of range");
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    /// Horizontal concatenation. All parts must have equal row counts.
    pub fn hstack(parts: &[&Matrix]) -> Matrix {
        let rows = parts.first().map_or(0, |m| m.rows);
        assert!(parts.iter().all(|m| m.rows == rows), "hstack: row counts differ");
        let cols = parts.iter().map(|m| m.cols).sum();
        let mut out = Matrix::zeros(rows, cols);
        let mut base = 0;
        for m in parts {
            for i in 0..rows {
                for j in 0..m.cols {
                    out[(i, base + j)] = m[(i, j)].clone();
                }
            }
            base += m.cols;
        }
        out
    }

    /// Vertical concatenation. All parts must have equal column counts.
    pub fn vstack(parts: &[&Matrix]) -> Matrix {
        let cols = parts.first().map_or(0, |m| m.cols);
        assert!(parts.iter().all(|m| m.cols == cols), "vstack: column counts differ");
        let rows = parts.iter().map(|m| m.rows).sum();
        let mut out = Matrix::zeros(rows, cols);
        let mut base = 0;
        for m in parts {
            for i in 0..m.rows {
                for j in 0..cols {
                    out[(base + i, j)] = m[(i, j)].clone();
                }
            }
            base += m.rows;
        }
        out
    }

    /// Block-diagonal assembly of the given blocks, in order.
    pub fn block_diag(blocks: &[&Matrix]) -> Matrix {
        let rows = blocks.iter().map(|m| m.rows).sum();
        let cols = blocks.iter().map(|m| m.cols).sum();
        let mut out = Matrix::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for m in blocks {
            for i in 0..m.rows {
                for j in 0..m.cols {
                    out[(r0 + i, c0 + j)] = m[(i, j)].clone();
                }
            }
            r0 += m.rows;
            c0 += m.cols;
        }
        out
    }

    /// Copy of the sub-block `rows r0..r1`, `cols c0..c1`.
    pub fn submatrix(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Matrix {
        assert!(r0 <= r1 && r1 <= self.rows && c0 <= c1 && c1 <= self.cols, "submatrix out of range");
        Matrix::from_fn(r1 - r0, c1 - c0, |i, j| self[(r0 + i, c0 + j)].clone())
    }

    /// Copy of the listed columns, in the listed order.
    pub fn select_cols(&self, idx: &[usize]) -> Matrix {
        Matrix::from_fn(self.rows, idx.len(), |i, j| self[(i, idx[j])].clone())
    }

    pub fn scale(&self, s: &Rational) -> Matrix {
        Matrix::from_fn(self.rows, self.cols, |i, j| &self[(i, j)] * s)
    }

    pub fn neg(&self) -> Matrix {
        Matrix::from_fn(self.rows, self.cols, |i, j| -self[(i, j)].clone())
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "add: shape mismatch");
        Matrix::from_fn(self.rows, self.cols, |i, j| &self[(i, j)] + &other[(i, j)])
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "sub: shape mismatch");
        Matrix::from_fn(self.rows, self.cols, |i, j| &self[(i, j)] - &other[(i, j)])
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "mul: inner dimensions differ");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let add = a * &other[(k, j)];
                    out[(i, j)] += add;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(self.cols, v.len(), "mul_vec: dimension mismatch");
        (0..self.rows)
            .map(|i| {
                let mut acc = Rational::zero();
                for j in 0..self.cols {
                    acc += &self[(i, j)] * &v[j];
                }
                acc
            })
            .collect()
    }

    /// Sum of squared entries (squared Frobenius norm), exact.
    pub fn frobenius_sq(&self) -> Rational {
        let mut acc = Rational::zero();
        for e in &self.data {
            acc += e * e;
        }
        acc
    }

    /// Reduced row echelon form and the pivot column indices.
    ///
    /// Pivots are scaled to 1 with zeros above and below; zero rows sink to
    /// the bottom. The pair (form, pivots) is unique, so it doubles as a
    /// canonical representative of the row space.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(pr) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                continue;
            };
            if pr != r {
                for j in 0..m.cols {
                    m.data.swap(pr * m.cols + j, r * m.cols + j);
                }
            }
            let inv = m[(r, c)].recip();
            for j in c..m.cols {
                let v = &m[(r, j)] * &inv;
                m[(r, j)] = v;
            }
            for i in 0..m.rows {
                if i != r && !m[(i, c)].is_zero() {
                    let f = m[(i, c)].clone();
                    for j in c..m.cols {
                        let v = &m[(i, j)] - &f * &m[(r, j)];
                        m[(i, j)] = v;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the null space, one column per free variable of the RREF.
    ///
    /// The basis is the standard one (free variable set to 1, pivots solved);
    /// callers wanting the canonical subspace form should go through
    /// [`crate::subspace::Subspace`].
    pub fn kernel_matrix(&self) -> Matrix {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut out = Matrix::zeros(self.cols, free.len());
        for (k, &fc) in free.iter().enumerate() {
            out[(fc, k)] = Rational::one();
            for (row, &pc) in pivots.iter().enumerate() {
                out[(pc, k)] = -r[(row, fc)].clone();
            }
        }
        out
    }

    /// Exact inverse of a square matrix.
    pub fn invert(&self) -> Result<Matrix, Singular> {
        assert!(self.is_square(), "invert: matrix not square");
        let n = self.rows;
        let aug = Matrix::hstack(&[self, &Matrix::identity(n)]);
        let (r, pivots) = aug.rref();
        if pivots.len() != n || pivots.iter().enumerate().any(|(i, &p)| p != i) {
            return Err(Singular);
        }
        Ok(r.submatrix(0, n, n, 2 * n))
    }

    /// One exact solution `X` of `self · X = rhs`, or `None` if inconsistent.
    ///
    /// Under-determined coordinates are fixed by `policy`, so the result is
    /// deterministic. When `Some`, `self · X == rhs` holds exactly.
    pub fn solve_particular(&self, rhs: &Matrix, policy: SolvePolicy) -> Option<Matrix> {
        assert_eq!(self.rows, rhs.rows, "solve_particular: row counts differ");
        let aug = Matrix::hstack(&[self, rhs]);
        let (r, pivots) = aug.rref();
        let pivots: Vec<usize> = pivots.into_iter().take_while(|&p| p < self.cols).collect();
        // a pivot inside the rhs block marks an inconsistent row
        let rank = pivots.len();
        for i in rank..r.rows {
            for j in self.cols..aug.cols {
                if !r[(i, j)].is_zero() {
                    return None;
                }
            }
        }
        let free_value = match policy {
            SolvePolicy::FreeZero => Rational::zero(),
            SolvePolicy::FreeOne => Rational::one(),
        };
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut x = Matrix::zeros(self.cols, rhs.cols);
        for j in 0..rhs.cols {
            for &fc in &free {
                x[(fc, j)] = free_value.clone();
            }
            for (row, &pc) in pivots.iter().enumerate() {
                let mut v = r[(row, self.cols + j)].clone();
                if !free_value.is_zero() {
                    for &fc in &free {
                        v -= &r[(row, fc)] * &free_value;
                    }
                }
                x[(pc, j)] = v;
            }
        }
        debug_assert_eq!(&self.mul(&x), rhs);
        Some(x)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = Rational;

    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of range");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of range");
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, other: &Matrix) -> Matrix {
        Matrix::add(self, other)
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, other: &Matrix) -> Matrix {
        Matrix::sub(self, other)
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, other: &Matrix) -> Matrix {
        Matrix::mul(self, other)
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  [")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self[(i, j)])?;
            }
            writeln!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// Exact squared Euclidean norm of a vector.
pub fn norm_sq(v: &[Rational]) -> Rational {
    let mut acc = Rational::zero();
    for e in v {
        acc += e * e;
    }
    acc
}
