use crate::error::{Error, Result};
use crate::matrix::MatrixComplex;
use crate::scalar::{abs1, cx, Cx, Real};

use super::{givens, householder};

const MAX_ITS_PER_EIGENVALUE: usize = 60;

/// All eigenvalues of a square complex matrix, with multiplicity, in the
/// order they deflate.
pub fn eigenvalues<T: Real>(m: &MatrixComplex<T>) -> Result<Vec<Cx<T>>> {
    if !m.is_square() {
        return Err(Error::InvalidInput("eigenvalues need a square matrix".into()));
    }
    if !m.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let mut h = m.clone();
    hessenberg(&mut h);
    hessenberg_qr(&mut h)
}

/// In-place unitary similarity to upper Hessenberg form.
fn hessenberg<T: Real>(h: &mut MatrixComplex<T>) {
    let n = h.rows();
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        let x: Vec<Cx<T>> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let Some((u, beta, c)) = householder(&x) else {
            continue;
        };
        // H <- P H on rows k+1.., columns k..
        for j in k..n {
            let mut s = cx(T::zero(), T::zero());
            for (t, ui) in u.iter().enumerate() {
                s += ui.conj() * h[(k + 1 + t, j)];
            }
            s = s * c;
            for (t, ui) in u.iter().enumerate() {
                h[(k + 1 + t, j)] -= ui * s;
            }
        }
        // H <- H P on columns k+1.., all rows
        for i in 0..n {
            let row = &mut h.as_mut_slice()[i * n + k + 1..(i + 1) * n];
            let mut s = cx(T::zero(), T::zero());
            for (v, ui) in row.iter().zip(&u) {
                s += v * ui;
            }
            s = s * c;
            for (v, ui) in row.iter_mut().zip(&u) {
                *v -= s * ui.conj();
            }
        }
        h[(k + 1, k)] = beta;
        for i in k + 2..n {
            h[(i, k)] = cx(T::zero(), T::zero());
        }
    }
}

/// Shift for the trailing 2x2 block: the eigenvalue closer to `d`.
fn wilkinson_shift<T: Real>(a: Cx<T>, b: Cx<T>, c: Cx<T>, d: Cx<T>) -> Cx<T> {
    let half = T::lit(0.5);
    let p = (a - d) * half;
    let bc = b * c;
    let disc = (p * p + bc).sqrt();
    let (d1, d2) = (p + disc, p - disc);
    let den = if d1.norm() >= d2.norm() { d1 } else { d2 };
    if den.norm() == T::zero() {
        return d;
    }
    d - bc / den
}

fn hessenberg_qr<T: Real>(h: &mut MatrixComplex<T>) -> Result<Vec<Cx<T>>> {
    let n = h.rows();
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return Ok(out);
    }
    let eps = T::epsilon();
    let smallnum = T::min_positive_value() * T::from_usize_lossy(n) / eps;
    let mut hi = n - 1;
    let mut its = 0usize;
    loop {
        if hi == 0 {
            out.push(h[(0, 0)]);
            break;
        }
        // locate the start of the unreduced block ending at hi
        let mut l = hi;
        while l > 0 {
            let sub = abs1(h[(l, l - 1)]);
            let mut diag = abs1(h[(l - 1, l - 1)]) + abs1(h[(l, l)]);
            if diag == T::zero() {
                diag = (l.saturating_sub(1)..=(l + 1).min(hi))
                    .map(|i| abs1(h[(i, l - 1)]))
                    .sum();
            }
            if sub <= smallnum || sub <= eps * diag {
                h[(l, l - 1)] = cx(T::zero(), T::zero());
                break;
            }
            l -= 1;
        }
        if l == hi {
            out.push(h[(hi, hi)]);
            hi -= 1;
            its = 0;
            continue;
        }
        if its >= MAX_ITS_PER_EIGENVALUE {
            return Err(Error::NoConvergence {
                iterations: its,
                index: hi,
            });
        }
        its += 1;

        let shift = if its % 10 == 0 {
            // exceptional shift to break cycles
            let s = T::lit(0.75) * h[(hi, hi - 1)].re.abs() + h[(hi, hi)].re.abs() * T::lit(1e-3);
            h[(hi, hi)] + cx(s, T::zero())
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };

        qr_sweep(h, l, hi, shift);
    }
    Ok(out)
}

/// One implicit single-shift QR sweep on the active block `l..=hi`.
fn qr_sweep<T: Real>(h: &mut MatrixComplex<T>, l: usize, hi: usize, shift: Cx<T>) {
    for k in l..hi {
        let (x, y) = if k == l {
            (h[(l, l)] - shift, h[(l + 1, l)])
        } else {
            (h[(k, k - 1)], h[(k + 1, k - 1)])
        };
        let (c, s) = givens(x, y);
        let cc = cx(c, T::zero());
        let j0 = if k == l { l } else { k - 1 };
        for j in j0..=hi {
            let a = h[(k, j)];
            let b = h[(k + 1, j)];
            h[(k, j)] = cc * a + s * b;
            h[(k + 1, j)] = -s.conj() * a + cc * b;
        }
        if k > l {
            h[(k + 1, k - 1)] = cx(T::zero(), T::zero());
        }
        let i1 = (k + 2).min(hi);
        for i in l..=i1 {
            let a = h[(i, k)];
            let b = h[(i, k + 1)];
            h[(i, k)] = cc * a + s.conj() * b;
            h[(i, k + 1)] = -s * a + cc * b;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;

    fn sorted(mut v: Vec<Cx<f64>>) -> Vec<Cx<f64>> {
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
        v
    }

    #[test]
    fn diagonal_and_rotation() {
        let d = Matrix::diag(&[1.0, 2.0, 3.0]).to_complex();
        let ev = sorted(eigenvalues(&d).unwrap());
        for (e, w) in ev.iter().zip([1.0, 2.0, 3.0]) {
            assert!((e - cx(w, 0.0)).norm() < 1e-14);
        }
        let rot = Matrix::from_row_major(2, 2, vec![0.0, 1.0, -1.0, 0.0]).to_complex();
        let ev = sorted(eigenvalues(&rot).unwrap());
        assert!((ev[0] - cx(0.0, -1.0)).norm() < 1e-14);
        assert!((ev[1] - cx(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn companion_matrix_roots() {
        // x^4 - 10x^3 + 35x^2 - 50x + 24 = (x-1)(x-2)(x-3)(x-4)
        let c = Matrix::from_row_major(
            4,
            4,
            vec![
                10.0, -35.0, 50.0, -24.0, //
                1.0, 0.0, 0.0, 0.0, //
                0.0, 1.0, 0.0, 0.0, //
                0.0, 0.0, 1.0, 0.0,
            ],
        )
        .to_complex();
        let ev = sorted(eigenvalues(&c).unwrap());
        for (e, w) in ev.iter().zip([1.0, 2.0, 3.0, 4.0]) {
            assert!((e - cx(w, 0.0)).norm() < 1e-9, "{e} vs {w}");
        }
    }

    #[test]
    fn jordan_block_and_zero_matrix() {
        let z = Matrix::<Cx<f64>>::zeros(5, 5);
        assert!(eigenvalues(&z).unwrap().iter().all(|e| e.norm() == 0.0));
        // nilpotent shift matrix: all eigenvalues 0 (ill-conditioned, loose tol)
        let j = Matrix::from_fn(4, 4, |i, k| if k == i + 1 { cx(1.0, 0.0) } else { cx(0.0, 0.0) });
        assert!(eigenvalues(&j).unwrap().iter().all(|e| e.norm() < 1e-3));
    }

    #[test]
    fn rejects_non_finite() {
        let mut m = Matrix::<Cx<f64>>::zeros(2, 2);
        m[(0, 1)] = cx(f64::NAN, 0.0);
        assert!(eigenvalues(&m).is_err());
    }
}
