//! Subspaces of ℚⁿ with a canonical basis representation.
//!
//! A subspace is stored as its ambient dimension plus a basis matrix in
//! column echelon form: each basis column has a leading 1, leading rows
//! strictly increase across columns, and a leading row is zero in every other
//! column. That form is unique per subspace, so derived structural equality
//! is subspace equality, and equal subspaces print identically.

use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::matrix::Matrix;
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    ambient: usize,
    basis: Matrix,
}

impl Subspace {
    /// The zero subspace `{0}` (empty basis).
    pub fn zero(ambient: usize) -> Self {
        Subspace { ambient, basis: Matrix::zeros(ambient, 0) }
    }

    /// The full space ℚ^ambient.
    pub fn full(ambient: usize) -> Self {
        Subspace { ambient, basis: Matrix::identity(ambient) }
    }

    /// Span of the columns of `m`, canonicalized. Zero and dependent columns
    /// are dropped.
    pub fn spanned_by(m: &Matrix) -> Self {
        let (r, pivots) = m.transpose().rref();
        let basis = r.submatrix(0, pivots.len(), 0, m.rows()).transpose();
        Subspace { ambient: m.rows(), basis }
    }

    /// Null space of `m` as a subspace of its column dimension.
    pub fn kernel_of(m: &Matrix) -> Self {
        Subspace::spanned_by(&m.kernel_matrix())
    }

    /// Column space of `m`.
    pub fn image_of(m: &Matrix) -> Self {
        Subspace::spanned_by(m)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    /// Canonical basis, one column per dimension.
    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient
    }

    /// Leading-row index of each basis column.
    fn pivot_rows(&self) -> Vec<usize> {
        (0..self.basis.cols())
            .map(|j| {
                (0..self.ambient)
                    .find(|&i| !self.basis[(i, j)].is_zero())
                    .expect("canonical basis has no zero columns")
            })
            .collect()
    }

    /// Exact membership test.
    pub fn contains(&self, v: &[Rational]) -> bool {
        assert_eq!(v.len(), self.ambient, "contains: ambient dimension mismatch");
        let mut rem: Vec<Rational> = v.to_vec();
        // each leading row is zero in every other column, so the coefficient
        // of basis column j is forced to be rem[lead_j]
        for (j, lead) in self.pivot_rows().into_iter().enumerate() {
            let c = rem[lead].clone();
            if c.is_zero() {
                continue;
            }
            for i in 0..self.ambient {
                let delta = &c * &self.basis[(i, j)];
                rem[i] -= delta;
            }
        }
        rem.iter().all(Zero::is_zero)
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        assert_eq!(self.ambient, other.ambient, "is_subspace_of: ambient dimension mismatch");
        (0..self.dim()).all(|j| other.contains(&self.basis.col(j)))
    }

    /// Sum of subspaces `self + other`.
    pub fn sum(&self, other: &Subspace) -> Subspace {
        assert_eq!(self.ambient, other.ambient, "sum: ambient dimension mismatch");
        Subspace::spanned_by(&Matrix::hstack(&[&self.basis, &other.basis]))
    }

    /// Intersection of subspaces.
    ///
    /// A vector lies in both spans exactly when it is `B_v α = -B_w β` for a
    /// kernel element `(α, β)` of `[B_v | B_w]`, so the intersection is the
    /// image of the α-part of that kernel under `B_v`.
    pub fn intersect(&self, other: &Subspace) -> Subspace {
        assert_eq!(self.ambient, other.ambient, "intersect: ambient dimension mismatch");
        let stacked = Matrix::hstack(&[&self.basis, &other.basis]);
        let kernel = stacked.kernel_matrix();
        let alpha = kernel.submatrix(0, self.dim(), 0, kernel.cols());
        Subspace::spanned_by(&self.basis.mul(&alpha))
    }

    /// Inverse image `{x : a·x ∈ self}` under a linear map into this space.
    pub fn preimage_under(&self, a: &Matrix) -> Subspace {
        assert_eq!(a.rows(), self.ambient, "preimage: codomain dimension mismatch");
        // kernel elements (x, y) of [a | basis] satisfy a·x = -basis·y ∈ self
        let stacked = Matrix::hstack(&[a, &self.basis]);
        let kernel = stacked.kernel_matrix();
        let x_part = kernel.submatrix(0, a.cols(), 0, kernel.cols());
        Subspace::spanned_by(&x_part)
    }

    /// Completes the basis to an invertible matrix `[basis | completion]`,
    /// choosing standard basis vectors in index order.
    pub fn extend_to_basis(&self) -> Matrix {
        let mut work = self.basis.clone();
        for i in 0..self.ambient {
            if work.cols() == self.ambient {
                break;
            }
            let mut e = Matrix::zeros(self.ambient, 1);
            e[(i, 0)] = Rational::one();
            let cand = Matrix::hstack(&[&work, &e]);
            if cand.rank() == work.cols() + 1 {
                work = cand;
            }
        }
        assert_eq!(work.cols(), self.ambient, "basis completion failed");
        work
    }
}
