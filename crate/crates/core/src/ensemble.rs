//! Dense and sparse i.i.d. random matrix ensembles.
//!
//! Generation is factored as raw draw -> Bernoulli mask -> scale, so the
//! sparse ensemble `eps_jk X_jk / sqrt(n p)` with every mask bit set is
//! exactly the dense ensemble `X_jk / sqrt(n)`.

use rand::Rng;
use rand_distr::{Distribution as _, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::matrix::{Matrix, MatrixComplex, MatrixReal};
use crate::rng::{self, Experiment};
use crate::scalar::{cx, Cx, Real};

/// Entry law. Every family has mean 0 and variance 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum Distribution {
    Gaussian,
    Rademacher,
    /// Uniform on `[-sqrt 3, sqrt 3]`.
    UniformPm,
    /// Atom `a` with probability `p`; the second atom `-p a / (1 - p)`
    /// carries the remaining mass. Unit variance forces `p a^2 = 1 - p`.
    TwoPoint { a: f64, p: f64 },
}

impl Distribution {
    /// Two-point law with atom `a > 0`; solves for the probability and the
    /// second atom `-1/a`.
    pub fn two_point(a: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return invalid(format!("two-point atom must be positive and finite, got {a}"));
        }
        let d = Distribution::TwoPoint {
            a,
            p: 1.0 / (1.0 + a * a),
        };
        d.validate()?;
        Ok(d)
    }

    /// Second atom of a two-point law.
    fn second_atom(a: f64, p: f64) -> f64 {
        -p * a / (1.0 - p)
    }

    /// Analytic mean and variance.
    pub fn moments(&self) -> (f64, f64) {
        match *self {
            Distribution::Gaussian | Distribution::Rademacher | Distribution::UniformPm => (0.0, 1.0),
            Distribution::TwoPoint { a, p } => {
                let b = Self::second_atom(a, p);
                let mean = p * a + (1.0 - p) * b;
                let second = p * a * a + (1.0 - p) * b * b;
                (mean, second - mean * mean)
            }
        }
    }

    /// `E|X|^3`.
    pub fn kappa3(&self) -> f64 {
        match *self {
            Distribution::Gaussian => 2.0 * (2.0 / std::f64::consts::PI).sqrt(),
            Distribution::Rademacher => 1.0,
            Distribution::UniformPm => 3.0 * 3f64.sqrt() / 4.0,
            Distribution::TwoPoint { a, p } => {
                let b = Self::second_atom(a, p);
                p * a.abs().powi(3) + (1.0 - p) * b.abs().powi(3)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Distribution::TwoPoint { a, p } = *self {
            if !(p > 0.0 && p < 1.0) || !a.is_finite() {
                return invalid(format!("two-point law needs 0 < p < 1 and finite a (a={a}, p={p})"));
            }
        }
        let (mean, var) = self.moments();
        if mean.abs() > 1e-9 || (var - 1.0).abs() > 1e-9 {
            return invalid(format!(
                "{self:?} has mean {mean} and variance {var}; need 0 and 1"
            ));
        }
        Ok(())
    }

    /// One draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Distribution::Gaussian => StandardNormal.sample(rng),
            Distribution::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            Distribution::UniformPm => {
                let s = 3f64.sqrt();
                rng.random_range(-s..=s)
            }
            Distribution::TwoPoint { a, p } => {
                if rng.random::<f64>() < p {
                    a
                } else {
                    Self::second_atom(a, p)
                }
            }
        }
    }

    /// Short lowercase name used in CSV/JSON output.
    pub fn name(&self) -> String {
        match *self {
            Distribution::Gaussian => "gaussian".into(),
            Distribution::Rademacher => "rademacher".into(),
            Distribution::UniformPm => "uniform_pm".into(),
            Distribution::TwoPoint { a, .. } => format!("two_point({a})"),
        }
    }
}

impl std::str::FromStr for Distribution {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "gaussian" | "normal" => Ok(Distribution::Gaussian),
            "rademacher" | "sign" => Ok(Distribution::Rademacher),
            "uniform" | "uniform_pm" | "uniformpm" => Ok(Distribution::UniformPm),
            _ => {
                let inner = t
                    .strip_prefix("two_point(")
                    .or_else(|| t.strip_prefix("twopoint("))
                    .and_then(|r| r.strip_suffix(')'));
                match inner.map(str::parse::<f64>) {
                    Some(Ok(a)) => Distribution::two_point(a),
                    _ => invalid(format!("unknown distribution '{s}'")),
                }
            }
        }
    }
}

/// One random-matrix law: entry family, dimension, retention probability
/// and seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub n: usize,
    pub dist: Distribution,
    /// Bernoulli retention probability; 1 is the dense ensemble.
    pub p_n: f64,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn new(n: usize, dist: Distribution, p_n: f64, seed: u64) -> Result<Self> {
        let spec = Self { n, dist, p_n, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn dense(n: usize, dist: Distribution, seed: u64) -> Result<Self> {
        Self::new(n, dist, 1.0, seed)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return invalid("matrix dimension n must be at least 1");
        }
        if !(self.p_n > 0.0 && self.p_n <= 1.0) {
            return invalid(format!("sparsity p_n must lie in (0, 1], got {}", self.p_n));
        }
        self.dist.validate()
    }

    pub fn is_sparse(&self) -> bool {
        self.p_n < 1.0
    }

    pub fn kappa3(&self) -> f64 {
        self.dist.kappa3()
    }

    /// Overall scale `1 / sqrt(n p_n)`.
    pub fn scale(&self) -> f64 {
        1.0 / (self.n as f64 * self.p_n).sqrt()
    }

    /// The spec for trial `trial` of a Monte Carlo experiment.
    pub fn for_trial(&self, experiment: Experiment, trial: u64) -> Self {
        Self {
            seed: rng::derive_seed(self.seed, &[experiment as u64, trial]),
            ..*self
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..*self }
    }
}

/// Unscaled i.i.d. entries `X_jk`, row-major.
pub fn raw_entries(spec: &EnsembleSpec) -> Vec<f64> {
    let mut rng = rng::stream(spec.seed, Experiment::Matrix, 0);
    (0..spec.n * spec.n).map(|_| spec.dist.sample(&mut rng)).collect()
}

/// Bernoulli(p_n) mask `eps_jk`, drawn from a stream independent of the
/// raw entries. All ones when `p_n = 1`.
pub fn sparsity_mask(spec: &EnsembleSpec) -> Vec<bool> {
    let len = spec.n * spec.n;
    if !spec.is_sparse() {
        return vec![true; len];
    }
    let mut rng = rng::stream(spec.seed, Experiment::Matrix, 1);
    (0..len).map(|_| rng.random::<f64>() < spec.p_n).collect()
}

/// Assemble `eps_jk X_jk / sqrt(n p_n)` from given raw entries and mask.
pub fn assemble<T: Real>(n: usize, p_n: f64, raw: &[f64], mask: &[bool]) -> MatrixReal<T> {
    assert_eq!(raw.len(), n * n);
    assert_eq!(mask.len(), n * n);
    let scale = 1.0 / (n as f64 * p_n).sqrt();
    let data = raw
        .iter()
        .zip(mask)
        .map(|(&x, &keep)| if keep { T::lit(x * scale) } else { T::zero() })
        .collect();
    Matrix::from_row_major(n, n, data)
}

/// Draw one matrix from the ensemble. Deterministic in `spec.seed`.
pub fn sample_matrix<T: Real>(spec: &EnsembleSpec) -> Result<MatrixReal<T>> {
    spec.validate()?;
    let raw = raw_entries(spec);
    let mask = sparsity_mask(spec);
    Ok(assemble(spec.n, spec.p_n, &raw, &mask))
}

/// `M - z I`.
pub fn shift_matrix<T: Real>(m: &MatrixReal<T>, z: Cx<T>) -> MatrixComplex<T> {
    assert!(m.is_square(), "shift_matrix needs a square matrix");
    m.to_complex().shifted(z)
}

/// Uniform point on the closed unit disc by rejection from `[-1, 1]^2`.
pub fn sample_unit_disc<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    loop {
        let x: f64 = rng.random_range(-1.0..=1.0);
        let y: f64 = rng.random_range(-1.0..=1.0);
        if x * x + y * y <= 1.0 {
            return (x, y);
        }
    }
}

/// The disc point `xi` used by [`smooth_matrix`] for a given seed.
pub fn smoothing_point<T: Real>(seed: u64) -> Cx<T> {
    let mut rng = rng::stream(seed, Experiment::Smoothing, 0);
    let (x, y) = sample_unit_disc(&mut rng);
    cx(T::lit(x), T::lit(y))
}

/// `M - z I - r xi I` with `xi` uniform on the unit disc, drawn from `seed`.
pub fn smooth_matrix<T: Real>(m: &MatrixReal<T>, z: Cx<T>, r: T, seed: u64) -> Result<MatrixComplex<T>> {
    if !(r >= T::zero()) || !r.is_finite() {
        return invalid(format!("smoothing radius must be finite and >= 0, got {r}"));
    }
    if r == T::zero() {
        return Ok(shift_matrix(m, z));
    }
    let xi = smoothing_point::<T>(seed);
    Ok(shift_matrix(m, z + xi * r))
}
