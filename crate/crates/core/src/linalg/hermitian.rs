use crate::error::{Error, Result};
use crate::matrix::MatrixComplex;
use crate::scalar::{cx, Cx, Real};

use super::householder;

const MAX_QL_ITS: usize = 60;

/// Eigenvalues of a Hermitian matrix, ascending. Only the lower triangle is
/// read.
pub fn hermitian_eigenvalues<T: Real>(a: &MatrixComplex<T>) -> Result<Vec<T>> {
    if !a.is_square() {
        return Err(Error::InvalidInput("Hermitian eigenvalues need a square matrix".into()));
    }
    if !a.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let (mut d, mut e) = tridiagonalize(a);
    tridiagonal_ql(&mut d, &mut e)?;
    d.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    Ok(d)
}

/// Householder reduction to a real symmetric tridiagonal `(diag, offdiag)`.
///
/// The complex off-diagonal entries are replaced by their moduli; a diagonal
/// unitary similarity makes that exact.
fn tridiagonalize<T: Real>(a: &MatrixComplex<T>) -> (Vec<T>, Vec<T>) {
    let n = a.rows();
    // work on a full Hermitian copy built from the lower triangle
    let mut h = MatrixComplex::from_fn(n, n, |i, j| if i >= j { a[(i, j)] } else { a[(j, i)].conj() });
    let mut off = vec![T::zero(); n.saturating_sub(1)];
    for k in 0..n.saturating_sub(1) {
        let x: Vec<Cx<T>> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let Some((u, beta, c)) = householder(&x) else {
            off[k] = x[0].norm();
            continue;
        };
        off[k] = beta.norm();
        let m = n - k - 1;
        // p = c * A22 u
        let mut p = vec![cx(T::zero(), T::zero()); m];
        for (i, pi) in p.iter_mut().enumerate() {
            let row = &h.row(k + 1 + i)[k + 1..];
            let mut s = cx(T::zero(), T::zero());
            for (v, uj) in row.iter().zip(&u) {
                s += v * uj;
            }
            *pi = s * c;
        }
        // q = p - (c/2)(u^H p) u
        let uhp: Cx<T> = u.iter().zip(&p).map(|(ui, pi)| ui.conj() * pi).sum();
        let kk = uhp * (c * T::lit(0.5));
        let q: Vec<Cx<T>> = p.iter().zip(&u).map(|(pi, ui)| pi - ui * kk).collect();
        // A22 <- A22 - u q^H - q u^H
        for i in 0..m {
            let (ui, qi) = (u[i], q[i]);
            let row = &mut h.as_mut_slice()[(k + 1 + i) * n + k + 1..(k + 2 + i) * n];
            for (j, v) in row.iter_mut().enumerate() {
                *v -= ui * q[j].conj() + qi * u[j].conj();
            }
        }
    }
    let diag = (0..n).map(|i| h[(i, i)].re).collect();
    (diag, off)
}

/// Implicit QL with Wilkinson-style shifts on a symmetric tridiagonal.
/// `off[i]` couples `i` and `i+1`. Eigenvalues overwrite `d`.
fn tridiagonal_ql<T: Real>(d: &mut [T], off: &mut [T]) -> Result<()> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    let mut e = off.to_vec();
    e.push(T::zero());
    let eps = T::epsilon();
    let two = T::lit(2.0);
    for l in 0..n {
        let mut its = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            if its == MAX_QL_ITS {
                return Err(Error::NoConvergence { iterations: its, index: l });
            }
            its += 1;
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(T::one());
            g = d[m] - d[l] + e[l] / (g + r.abs().copysign(g));
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] -= p;
                    e[m] = T::zero();
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    Ok(())
}
