//! Dense eigenvalue and singular-value kernels, eigenvalues only.
//!
//! * [`eigenvalues`]: Householder Hessenberg reduction + complex single-shift
//!   QR with Wilkinson shifts.
//! * [`hermitian_eigenvalues`]: Householder tridiagonalization + implicit QL.
//! * [`singular_values`]: Golub-Kahan bidiagonalization + Golub-Reinsch
//!   implicit-shift QR on the bidiagonal.
//! * [`log_abs_det`]: LU with partial pivoting.

mod eig;
mod hermitian;
mod svd;

pub use eig::eigenvalues;
pub use hermitian::hermitian_eigenvalues;
pub use svd::singular_values;

use crate::matrix::MatrixComplex;
use crate::scalar::{cx, Cx, Real};

/// Householder vector `u` with `(I - 2 u u^H / u^H u) x = beta e_1`.
///
/// Returns `None` when `x` is already zero. `beta` has modulus `||x||` and the
/// phase opposite to `x[0]`, which keeps `u[0]` free of cancellation.
pub(crate) fn householder<T: Real>(x: &[Cx<T>]) -> Option<(Vec<Cx<T>>, Cx<T>, T)> {
    let norm = x.iter().map(|v| v.norm_sqr()).sum::<T>().sqrt();
    if norm == T::zero() {
        return None;
    }
    let a0 = x[0];
    let phase = if a0.norm() == T::zero() {
        cx(T::one(), T::zero())
    } else {
        a0 / a0.norm()
    };
    let beta = -phase * norm;
    let mut u = x.to_vec();
    u[0] = a0 - beta;
    let uu: T = u.iter().map(|v| v.norm_sqr()).sum();
    if uu == T::zero() {
        return None;
    }
    Some((u, beta, T::lit(2.0) / uu))
}

/// Complex Givens rotation `[c s; -conj(s) c]` mapping `(a, b)` to `(r, 0)`.
#[inline]
pub(crate) fn givens<T: Real>(a: Cx<T>, b: Cx<T>) -> (T, Cx<T>) {
    let nb = b.norm();
    if nb == T::zero() {
        return (T::one(), cx(T::zero(), T::zero()));
    }
    let na = a.norm();
    if na == T::zero() {
        return (T::zero(), b.conj() / nb);
    }
    let norm = na.hypot(nb);
    let c = na / norm;
    let s = (a / na) * b.conj() / norm;
    (c, s)
}

/// `log |det M|` and the unit-modulus phase of `det M`, by LU with partial
/// pivoting. An exactly singular matrix gives `-inf`.
pub fn log_abs_det<T: Real>(m: &MatrixComplex<T>) -> (T, Cx<T>) {
    assert!(m.is_square(), "determinant needs a square matrix");
    let n = m.rows();
    let mut a = m.clone();
    let mut log_abs = T::zero();
    let mut phase = cx(T::one(), T::zero());
    for k in 0..n {
        let (piv, pmax) = (k..n)
            .map(|i| (i, a[(i, k)].norm()))
            .fold((k, -T::one()), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pmax == T::zero() {
            return (T::neg_infinity(), cx(T::zero(), T::zero()));
        }
        if piv != k {
            for j in 0..n {
                let tmp = a[(k, j)];
                a[(k, j)] = a[(piv, j)];
                a[(piv, j)] = tmp;
            }
            phase = -phase;
        }
        let pivot = a[(k, k)];
        log_abs += pmax.ln();
        phase = phase * (pivot / pmax);
        for i in k + 1..n {
            let f = a[(i, k)] / pivot;
            if f.norm() == T::zero() {
                continue;
            }
            for j in k + 1..n {
                let v = a[(k, j)];
                a[(i, j)] -= f * v;
            }
        }
    }
    (log_abs, phase)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;

    #[test]
    fn householder_maps_to_axis() {
        let x = vec![cx(1.0, 2.0), cx(-0.5, 0.1), cx(3.0, -1.0)];
        let (u, beta, c) = householder(&x).unwrap();
        let uhx: Cx<f64> = u.iter().zip(&x).map(|(a, b)| a.conj() * b).sum();
        let hx: Vec<Cx<f64>> = x.iter().zip(&u).map(|(xi, ui)| xi - ui * uhx * c).collect();
        assert!((hx[0] - beta).norm() < 1e-12);
        assert!(hx[1].norm() < 1e-12 && hx[2].norm() < 1e-12);
    }

    #[test]
    fn givens_zeroes_second_entry() {
        let (a, b) = (cx(0.3f64, -0.7), cx(-1.1, 0.4));
        let (c, s) = givens(a, b);
        let lower = -s.conj() * a + b * c;
        assert!(lower.norm() < 1e-14);
        assert!((c * c + s.norm_sqr() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn lu_determinant_of_small_matrix() {
        // det [[1, 2], [3, 4]] = -2
        let m = Matrix::from_row_major(2, 2, vec![1.0, 2.0, 3.0, 4.0]).to_complex();
        let (l, ph) = log_abs_det(&m);
        assert!((l - 2f64.ln()).abs() < 1e-14);
        assert!((ph - cx(-1.0, 0.0)).norm() < 1e-14);
        let sing = Matrix::from_row_major(2, 2, vec![1.0, 2.0, 2.0, 4.0]).to_complex();
        assert_eq!(log_abs_det(&sing).0, f64::NEG_INFINITY);
    }
}
