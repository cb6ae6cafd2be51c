//! The 2n x 2n Hermitian block matrix
//!
//! ```text
//!     W = [ 0    B ]      B = X - z I
//!         [ B^*  0 ]
//! ```
//!
//! whose spectrum is `{±s_j(B)}`, and the empirical Stieltjes transform of
//! the symmetrized singular-value law.

use num_traits::Zero;

use crate::ensemble::shift_matrix;
use crate::error::{invalid, Result};
use crate::linalg;
use crate::matrix::{Matrix, MatrixComplex, MatrixReal};
use crate::scalar::{Cx, Real};

#[derive(Debug, Clone)]
pub struct Hermitization<T> {
    w: MatrixComplex<T>,
    z: Option<Cx<T>>,
    n: usize,
}

impl<T: Real> Hermitization<T> {
    /// Build `W` from an arbitrary square off-diagonal block `B`.
    pub fn from_block(b: MatrixComplex<T>, z: Option<Cx<T>>) -> Self {
        assert!(b.is_square(), "hermitization needs a square block");
        let n = b.rows();
        let w = Matrix::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
            (true, false) => b[(i, j - n)],
            (false, true) => b[(j, i - n)].conj(),
            _ => Cx::zero(),
        });
        Self { w, z, n }
    }

    pub fn matrix(&self) -> &MatrixComplex<T> {
        &self.w
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn z(&self) -> Option<Cx<T>> {
        self.z
    }

    /// Ascending eigenvalues of `W`.
    pub fn eigenvalues(&self) -> Result<Vec<T>> {
        linalg::hermitian_eigenvalues(&self.w)
    }

    /// Singular values of `B`, descending: the top half of `eig(W)`.
    pub fn singular_values(&self) -> Result<Vec<T>> {
        let ev = self.eigenvalues()?;
        Ok(ev.iter().rev().take(self.n).map(|e| e.abs()).collect())
    }
}

/// `W` for `B = M - z I`.
pub fn build_hermitization<T: Real>(m: &MatrixReal<T>, z: Cx<T>) -> Hermitization<T> {
    Hermitization::from_block(shift_matrix(m, z), Some(z))
}

/// `S_n(alpha) = (1/2n) sum_j [(s_j - alpha)^-1 + (-s_j - alpha)^-1]`.
pub fn stieltjes_from_singular_values<T: Real>(sv: &[T], alpha: Cx<T>) -> Result<Cx<T>> {
    if !(alpha.im > T::zero()) {
        return invalid(format!("Stieltjes transform needs Im alpha > 0, got {alpha}"));
    }
    let n = T::from_usize_lossy(sv.len());
    let sum: Cx<T> = sv
        .iter()
        .map(|&s| (Cx::from(s) - alpha).inv() + (Cx::from(-s) - alpha).inv())
        .sum();
    Ok(sum / (n + n))
}

/// `s_n(w) = (1/n) sum_j (s_j^2 - w)^-1`, the transform of the squared law.
pub fn stieltjes_squared<T: Real>(sv: &[T], w: Cx<T>) -> Cx<T> {
    let n = T::from_usize_lossy(sv.len());
    sv.iter().map(|&s| (Cx::from(s * s) - w).inv()).sum::<Cx<T>>() / n
}

/// Single-sample `S_n(alpha, z)` for the matrix `m - z I`.
pub fn stieltjes_empirical<T: Real>(m: &MatrixReal<T>, z: Cx<T>, alpha: Cx<T>) -> Result<Cx<T>> {
    if !(alpha.im > T::zero()) {
        return invalid(format!("Stieltjes transform needs Im alpha > 0, got {alpha}"));
    }
    let sv = crate::spectra::shifted_singular_values(m, z, T::zero(), 0)?;
    stieltjes_from_singular_values(&sv, alpha)
}
