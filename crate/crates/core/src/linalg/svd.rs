use crate::error::{Error, Result};
use crate::matrix::MatrixComplex;
use crate::scalar::{cx, Cx, Real};

use super::householder;

const MAX_SVD_ITS: usize = 75;

/// Singular values of a complex matrix, descending.
pub fn singular_values<T: Real>(a: &MatrixComplex<T>) -> Result<Vec<T>> {
    if !a.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let transposed;
    let a = if a.rows() < a.cols() {
        transposed = a.adjoint();
        &transposed
    } else {
        a
    };
    let (mut d, mut e) = bidiagonalize(a);
    bidiagonal_qr(&mut d, &mut e)?;
    d.sort_by(|x, y| y.partial_cmp(x).expect("finite singular values"));
    Ok(d)
}

/// Golub-Kahan reduction of a tall matrix to real upper bidiagonal form.
/// Returns `(diag, super)` with `super[0] = 0` and `super[i]` coupling
/// columns `i-1` and `i`. Moduli replace the complex entries.
fn bidiagonalize<T: Real>(a: &MatrixComplex<T>) -> (Vec<T>, Vec<T>) {
    let (m, n) = (a.rows(), a.cols());
    let mut w = a.clone();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    let zero = cx(T::zero(), T::zero());
    for k in 0..n {
        // left reflector on column k, rows k..m
        let x: Vec<Cx<T>> = (k..m).map(|i| w[(i, k)]).collect();
        match householder(&x) {
            Some((u, beta, c)) => {
                for j in k + 1..n {
                    let mut s = zero;
                    for (t, ui) in u.iter().enumerate() {
                        s += ui.conj() * w[(k + t, j)];
                    }
                    s = s * c;
                    for (t, ui) in u.iter().enumerate() {
                        w[(k + t, j)] -= ui * s;
                    }
                }
                d[k] = beta.norm();
            }
            None => d[k] = T::zero(),
        }
        if k + 1 >= n {
            continue;
        }
        // right reflector on row k, columns k+1..n
        let y: Vec<Cx<T>> = (k + 1..n).map(|j| w[(k, j)].conj()).collect();
        match householder(&y) {
            Some((u, beta, c)) => {
                for i in k + 1..m {
                    let row = &mut w.as_mut_slice()[i * n + k + 1..(i + 1) * n];
                    let mut s = zero;
                    for (v, uj) in row.iter().zip(&u) {
                        s += v * uj;
                    }
                    s = s * c;
                    for (v, uj) in row.iter_mut().zip(&u) {
                        *v -= s * uj.conj();
                    }
                }
                e[k + 1] = beta.norm();
            }
            None => e[k + 1] = T::zero(),
        }
    }
    (d, e)
}

/// Golub-Reinsch implicit-shift QR on an upper bidiagonal, values only.
/// Singular values (unsorted, nonnegative) overwrite `w`.
fn bidiagonal_qr<T: Real>(w: &mut [T], rv1: &mut [T]) -> Result<()> {
    let n = w.len();
    if n == 0 {
        return Ok(());
    }
    let anorm = (0..n).map(|i| w[i].abs() + rv1[i].abs()).fold(T::zero(), T::max);
    let small = |v: T| v.abs() <= T::epsilon() * anorm;
    let two = T::lit(2.0);
    for k in (0..n).rev() {
        let mut its = 0;
        loop {
            // find l such that rv1[l] is negligible (rv1[0] is always zero)
            let mut l = k;
            let mut cancel = true;
            loop {
                if l == 0 || small(rv1[l]) {
                    cancel = false;
                    break;
                }
                if small(w[l - 1]) {
                    break;
                }
                l -= 1;
            }
            if cancel {
                // w[l-1] is negligible: chase rv1[l] off the band
                let (mut c, mut s) = (T::zero(), T::one());
                for i in l..=k {
                    let f = s * rv1[i];
                    rv1[i] = c * rv1[i];
                    if small(f) {
                        break;
                    }
                    let g = w[i];
                    let h = f.hypot(g);
                    w[i] = h;
                    c = g / h;
                    s = -f / h;
                }
            }
            let z = w[k];
            if l == k {
                if z < T::zero() {
                    w[k] = -z;
                }
                break;
            }
            if its == MAX_SVD_ITS {
                return Err(Error::NoConvergence { iterations: its, index: k });
            }
            its += 1;
            let mut x = w[l];
            let nm = k - 1;
            let mut y = w[nm];
            let mut g = rv1[nm];
            let mut h = rv1[k];
            let mut f = ((y - z) * (y + z) + (g - h) * (g + h)) / (two * h * y);
            g = f.hypot(T::one());
            f = ((x - z) * (x + z) + h * ((y / (f + g.abs().copysign(f))) - h)) / x;
            let (mut c, mut s) = (T::one(), T::one());
            for j in l..=nm {
                let i = j + 1;
                g = rv1[i];
                y = w[i];
                h = s * g;
                g = c * g;
                let mut zz = f.hypot(h);
                rv1[j] = zz;
                c = f / zz;
                s = h / zz;
                f = x * c + g * s;
                g = g * c - x * s;
                h = y * s;
                y = y * c;
                zz = f.hypot(h);
                w[j] = zz;
                if zz != T::zero() {
                    c = f / zz;
                    s = h / zz;
                }
                f = c * g + s * y;
                x = c * y - s * g;
            }
            rv1[l] = T::zero();
            rv1[k] = f;
            w[k] = x;
        }
    }
    Ok(())
}
