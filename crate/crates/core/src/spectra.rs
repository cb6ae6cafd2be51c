//! Eigenvalue and singular-value spectra packaged as empirical measures.

use crate::ensemble::{smoothing_point, shift_matrix};
use crate::error::{invalid, Error, Result};
use crate::hermitization::Hermitization;
use crate::linalg;
use crate::matrix::{MatrixComplex, MatrixReal};
use crate::scalar::{cx, Cx, Real};

/// Where a spectrum came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumMeta<T> {
    pub n: usize,
    /// Shift `z` applied before the eigensolve, if any.
    pub z_shift: Option<Cx<T>>,
    /// Smoothing radius `r` (0 when unsmoothed).
    pub r_smooth: T,
    /// The matrix handed to the eigensolver was real.
    pub real_source: bool,
}

/// Multiset of `n` complex eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrum<T> {
    pub values: Vec<Cx<T>>,
    pub meta: SpectrumMeta<T>,
}

impl<T: Real> ComplexSpectrum<T> {
    pub fn new(values: Vec<Cx<T>>) -> Self {
        let n = values.len();
        Self {
            values,
            meta: SpectrumMeta {
                n,
                z_shift: None,
                r_smooth: T::zero(),
                real_source: false,
            },
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Whether every eigenvalue's conjugate is present in the multiset (to
    /// within `tol`), matching eigenvalues greedily by nearest neighbour.
    pub fn is_conjugate_closed(&self, tol: T) -> bool {
        let mut pool: Vec<Option<Cx<T>>> = self.values.iter().copied().map(Some).collect();
        for v in &self.values {
            let target = v.conj();
            let best = pool
                .iter()
                .enumerate()
                .filter_map(|(i, w)| w.map(|w| (i, (w - target).norm())))
                .min_by(|a, b| a.1.partial_cmp(&b.1).expect("finite"));
            match best {
                Some((i, d)) if d <= tol => pool[i] = None,
                _ => return false,
            }
        }
        true
    }

    /// `prod |lambda_j|` as a logarithm.
    pub fn log_abs_prod(&self) -> T {
        self.values.iter().map(|v| v.norm().ln()).sum()
    }

    /// CSV with header `re,im`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("re,im\n");
        for v in &self.values {
            s.push_str(&format!("{},{}\n", v.re, v.im));
        }
        s
    }
}

/// Eigenvalues of `m` with multiplicity.
pub fn eigenvalues<T: Real>(m: &MatrixComplex<T>) -> Result<ComplexSpectrum<T>> {
    let real_source = m.as_slice().iter().all(|v| v.im == T::zero());
    let values = linalg::eigenvalues(m)?;
    let mut s = ComplexSpectrum::new(values);
    s.meta.real_source = real_source;
    Ok(s)
}

/// [`eigenvalues`], retrying once with `m + 1e-12 I` if the QR iteration
/// fails to converge.
pub fn eigenvalues_with_retry<T: Real>(m: &MatrixComplex<T>) -> Result<ComplexSpectrum<T>> {
    match eigenvalues(m) {
        Err(Error::NoConvergence { .. }) => eigenvalues(&m.shifted(cx(T::lit(-1e-12), T::zero()))),
        other => other,
    }
}

/// Spectrum of the real matrix `m - z I - r xi I`, with `xi` drawn from
/// `smoothing_seed` when `r > 0`.
pub fn shifted_spectrum<T: Real>(
    m: &MatrixReal<T>,
    z: Cx<T>,
    r: T,
    smoothing_seed: u64,
) -> Result<ComplexSpectrum<T>> {
    let shift = if r > T::zero() {
        z + smoothing_point::<T>(smoothing_seed) * r
    } else {
        z
    };
    let mut s = eigenvalues_with_retry(&shift_matrix(m, shift))?;
    s.meta.z_shift = Some(z);
    s.meta.r_smooth = r;
    Ok(s)
}

/// Singular values, descending, by Golub-Kahan bidiagonalization.
pub fn singular_values<T: Real>(m: &MatrixComplex<T>) -> Result<Vec<T>> {
    if !m.is_square() {
        return invalid("singular_values needs a square matrix");
    }
    linalg::singular_values(m)
}

/// How singular values of `X - z I` are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SvRoute {
    /// Golub-Kahan bidiagonalization of `X - z I`.
    Bidiagonal,
    /// Nonnegative half of the spectrum of the 2n x 2n hermitization.
    Hermitization,
}

impl SvRoute {
    /// Hermitization for a nonzero total shift, bidiagonal SVD otherwise.
    pub fn for_shift<T: Real>(shift: Cx<T>) -> Self {
        if shift.norm() > T::zero() {
            SvRoute::Hermitization
        } else {
            SvRoute::Bidiagonal
        }
    }
}

/// Singular values of `b`, descending, through the chosen route.
pub fn singular_values_via<T: Real>(b: &MatrixComplex<T>, route: SvRoute) -> Result<Vec<T>> {
    match route {
        SvRoute::Bidiagonal => singular_values(b),
        SvRoute::Hermitization => Hermitization::from_block(b.clone(), None).singular_values(),
    }
}

/// Singular values of `m - z I - r xi I` (descending); the route follows
/// [`SvRoute::for_shift`].
pub fn shifted_singular_values<T: Real>(
    m: &MatrixReal<T>,
    z: Cx<T>,
    r: T,
    smoothing_seed: u64,
) -> Result<Vec<T>> {
    let shift = if r > T::zero() {
        z + smoothing_point::<T>(smoothing_seed) * r
    } else {
        z
    };
    singular_values_via(&shift_matrix(m, shift), SvRoute::for_shift(shift))
}

/// Equal-weight empirical distribution function of finite real samples.
/// `F(x) = #{points <= x} / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf<T> {
    points: Vec<T>,
}

impl<T: Real> EmpiricalCdf<T> {
    pub fn new(mut points: Vec<T>) -> Result<Self> {
        if points.is_empty() {
            return invalid("empirical CDF needs at least one point");
        }
        if points.iter().any(|p| !p.is_finite()) {
            return invalid("empirical CDF points must be finite");
        }
        points.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        Ok(Self { points })
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn eval(&self, x: T) -> T {
        let k = self.points.partition_point(|p| *p <= x);
        T::from_usize_lossy(k) / T::from_usize_lossy(self.points.len())
    }

    /// CSV with header `x,F`; one row per sorted point, `F` right-continuous.
    pub fn to_csv(&self) -> String {
        let n = self.points.len();
        let mut s = String::from("x,F\n");
        for (i, p) in self.points.iter().enumerate() {
            s.push_str(&format!("{},{}\n", p, (i + 1) as f64 / n as f64));
        }
        s
    }
}

/// Symmetrized distribution `F~(x) = (1 + sgn(x) F(x^2)) / 2` of a law `F`
/// on `[0, inf)`, with `sgn(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricCdf<T> {
    base: EmpiricalCdf<T>,
}

impl<T: Real> SymmetricCdf<T> {
    pub fn eval(&self, x: T) -> T {
        let half = T::lit(0.5);
        if x > T::zero() {
            half * (T::one() + self.base.eval(x * x))
        } else if x < T::zero() {
            half * (T::one() - self.base.eval(x * x))
        } else {
            half
        }
    }

    /// Atom locations `±sqrt(p)`, each carrying half the original mass.
    pub fn atoms(&self) -> Vec<T> {
        let mut out: Vec<T> = self
            .base
            .points()
            .iter()
            .flat_map(|p| [-p.sqrt(), p.sqrt()])
            .collect();
        out.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        out
    }

    pub fn base(&self) -> &EmpiricalCdf<T> {
        &self.base
    }
}

pub fn symmetrize_cdf<T: Real>(f: &EmpiricalCdf<T>) -> Result<SymmetricCdf<T>> {
    if f.points().first().is_some_and(|p| *p < T::zero()) {
        return invalid("symmetrization needs a law supported on [0, inf)");
    }
    Ok(SymmetricCdf { base: f.clone() })
}

/// `F_n(x, z, r)`: empirical law of the squared singular values of
/// `m - z I - r xi I`.
pub fn squared_sv_measure<T: Real>(
    m: &MatrixReal<T>,
    z: Cx<T>,
    r: T,
    smoothing_seed: u64,
) -> Result<EmpiricalCdf<T>> {
    let sv = shifted_singular_values(m, z, r, smoothing_seed)?;
    EmpiricalCdf::new(sv.into_iter().map(|s| s * s).collect())
}

/// Two-dimensional empirical spectral distribution `G_n(x, y)`.
#[derive(Debug, Clone)]
pub struct Esd2d<T> {
    values: Vec<Cx<T>>,
}

impl<T: Real> Esd2d<T> {
    /// Fraction of eigenvalues with `Re <= x` and `Im <= y`.
    pub fn eval(&self, x: T, y: T) -> T {
        let k = self.values.iter().filter(|v| v.re <= x && v.im <= y).count();
        T::from_usize_lossy(k) / T::from_usize_lossy(self.values.len().max(1))
    }

    /// Moduli `|lambda_j|`.
    pub fn radial(&self) -> Vec<T> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    /// Arguments `arg lambda_j` in `(-pi, pi]`.
    pub fn angular(&self) -> Vec<T> {
        self.values.iter().map(|v| v.arg()).collect()
    }

    pub fn values(&self) -> &[Cx<T>] {
        &self.values
    }
}

pub fn esd_2d<T: Real>(spec: &ComplexSpectrum<T>) -> Esd2d<T> {
    Esd2d {
        values: spec.values.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{sample_matrix, Distribution, EnsembleSpec};
    use crate::matrix::Matrix;

    fn gaussian(n: usize, seed: u64) -> MatrixReal<f64> {
        sample_matrix(&EnsembleSpec::dense(n, Distribution::Gaussian, seed).unwrap()).unwrap()
    }

    #[test]
    fn eigen_examples() {
        let d = eigenvalues(&Matrix::diag(&[1.0f64, 2.0, 3.0]).to_complex()).unwrap();
        let mut re: Vec<f64> = d.values.iter().map(|v| v.re).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(re.iter().zip([1.0, 2.0, 3.0]).all(|(a, b)| (a - b).abs() < 1e-14));
        let rot = eigenvalues(&Matrix::from_row_major(2, 2, vec![0.0f64, 1.0, -1.0, 0.0]).to_complex()).unwrap();
        assert!(rot.is_conjugate_closed(1e-12));
        assert!(rot.values.iter().all(|v| (v.norm() - 1.0).abs() < 1e-14 && v.re.abs() < 1e-14));
    }

    #[test]
    fn schur_inequality_and_conjugate_pairs() {
        for seed in 0..5 {
            let m = gaussian(16, seed);
            let s = eigenvalues(&m.to_complex()).unwrap();
            assert_eq!(s.len(), 16);
            let sum_sq: f64 = s.values.iter().map(|v| v.norm_sqr()).sum();
            assert!(sum_sq <= m.frobenius_sq() + 1e-8);
            assert!(s.is_conjugate_closed(1e-8));
        }
    }

    #[test]
    fn determinant_consistency() {
        for seed in 10..15 {
            let m = gaussian(16, seed).to_complex();
            let (logdet, _) = linalg::log_abs_det(&m);
            let ev = eigenvalues(&m).unwrap().log_abs_prod();
            let sv: f64 = singular_values(&m).unwrap().iter().map(|s| s.ln()).sum();
            // relative 1e-6 on |det| is an absolute 1e-6 on log|det|
            assert!((ev - logdet).abs() < 1e-6, "{ev} vs {logdet}");
            assert!((sv - logdet).abs() < 1e-6, "{sv} vs {logdet}");
            let sv2: f64 = singular_values(&m).unwrap().iter().map(|s| s * s).sum();
            assert!((sv2 - m.frobenius_sq()).abs() < 1e-8);
        }
    }

    #[test]
    fn both_sv_routes_agree() {
        let m = gaussian(12, 3);
        let b = shift_matrix(&m, cx(0.4, -0.3));
        let a = singular_values_via(&b, SvRoute::Bidiagonal).unwrap();
        let h = singular_values_via(&b, SvRoute::Hermitization).unwrap();
        for (x, y) in a.iter().zip(&h) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!(a.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn single_point_sv_measure() {
        let f = squared_sv_measure(&Matrix::<f64>::zeros(1, 1), cx(2.0, 0.0), 0.0, 0).unwrap();
        assert_eq!(f.len(), 1);
        assert!((f.points()[0] - 4.0).abs() < 1e-12);
        assert_eq!(f.eval(4.0), 1.0);
        assert_eq!(f.eval(3.9), 0.0);
    }

    #[test]
    fn symmetrization_examples() {
        let f = EmpiricalCdf::new(vec![1.0f64]).unwrap();
        let s = symmetrize_cdf(&f).unwrap();
        assert_eq!(s.eval(1.0), 1.0);
        assert_eq!(s.eval(0.0), 0.5);
        assert_eq!(s.eval(-1.0 - 1e-9), 0.0);

        let s4 = symmetrize_cdf(&EmpiricalCdf::new(vec![4.0f64]).unwrap()).unwrap();
        assert_eq!(s4.atoms(), vec![-2.0, 2.0]);
        assert_eq!(s4.eval(-2.0 - 1e-12), 0.0);
        assert_eq!(s4.eval(-1.0), 0.5);
        assert_eq!(s4.eval(2.0), 1.0);

        assert!(symmetrize_cdf(&EmpiricalCdf::new(vec![-1.0f64, 2.0]).unwrap()).is_err());
    }

    #[test]
    fn symmetric_reflection_identity() {
        let f = EmpiricalCdf::new(vec![0.25f64, 1.0, 1.0, 2.25, 7.0]).unwrap();
        let s = symmetrize_cdf(&f).unwrap();
        for x in [0.1, 0.5, 1.0, 1.2, 1.5, 3.0] {
            // F~(-x^-) = 1 - F~(x): approach -x from the left
            let left = s.eval(-x - 1e-9);
            assert!((left - (1.0 - s.eval(x))).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn esd_examples() {
        let s = ComplexSpectrum::new(vec![cx(1.0f64, 1.0)]);
        let g = esd_2d(&s);
        assert_eq!(g.eval(1.0, 1.0), 1.0);
        assert_eq!(g.eval(0.0, 1.0), 0.0);
        let s = eigenvalues(&gaussian(10, 1).to_complex()).unwrap();
        assert_eq!(esd_2d(&s).eval(f64::INFINITY, f64::INFINITY), 1.0);
        assert_eq!(esd_2d(&s).radial().len(), 10);
    }

    #[test]
    fn sv_measure_mass_and_median() {
        let m = gaussian(32, 8);
        let f = squared_sv_measure(&m, cx(0.7, 0.1), 0.0, 0).unwrap();
        let s = symmetrize_cdf(&f).unwrap();
        assert_eq!(s.eval(f64::INFINITY), 1.0);
        assert_eq!(s.eval(f64::NEG_INFINITY), 0.0);
        assert_eq!(s.eval(0.0), 0.5);
    }
}
