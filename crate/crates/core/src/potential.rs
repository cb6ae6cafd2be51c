//! Logarithmic potentials: empirical (Monte Carlo over smoothed shifts),
//! limiting (from the solved singular-value law) and the uniform-disc closed
//! form, plus circular means and disc characteristic functions.

use rayon::prelude::*;
use serde::Serialize;

use crate::ensemble::{sample_matrix, smoothing_point, EnsembleSpec};
use crate::error::{invalid, Error, Result};
use crate::limit_law::{density, density_default, symmetric_grid, LimitSolution};
use crate::matrix::MatrixReal;
use crate::rng::{derive_seed, Experiment};
use crate::scalar::{cx, Cx, Real};
use crate::spectra::{shifted_spectrum, shifted_singular_values, eigenvalues_with_retry};

/// Largest `rho` accepted by [`disc_char`].
pub const DISC_CHAR_MAX_RHO: f64 = 30.0;

/// Smoothing radius `n^{-1/8}`.
pub fn default_smoothing_radius(n: usize) -> f64 {
    (n as f64).powf(-0.125)
}

/// Potential of the uniform law on the unit disc.
pub fn disc_potential<T: Real>(z: Cx<T>) -> T {
    let t = z.norm_sqr();
    if t <= T::one() {
        (T::one() - t) * T::lit(0.5)
    } else {
        -z.norm().ln()
    }
}

/// Monte Carlo estimate of the smoothed empirical potential.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialEstimate<T> {
    pub value: T,
    pub trials: usize,
    pub excluded: usize,
    /// Smallest `s_n` over all trials, excluded ones included.
    pub min_smallest_sv: T,
    /// Per-trial `-(1/n) sum log s_j`, in trial order.
    pub per_trial: Vec<T>,
    /// Whether each trial passed the truncation gates.
    pub kept: Vec<bool>,
}

#[derive(Debug, Clone, Copy)]
struct TrialOutcome<T> {
    value: T,
    smallest: T,
    passed: bool,
}

fn potential_trial<T: Real>(m: &MatrixReal<T>, z: Cx<T>, r: T, smoothing_seed: u64) -> Result<TrialOutcome<T>> {
    let n = m.rows();
    let shift = if r > T::zero() { z + smoothing_point::<T>(smoothing_seed) * r } else { z };
    let sv = shifted_singular_values(m, z, r, smoothing_seed)?;
    let sum_log: T = sv.iter().map(|s| s.ln()).sum();
    let largest = sv[0];
    let smallest = sv[n - 1];
    let floor = T::from_usize_lossy(n).powi(-3);
    let ceiling = T::lit(4.0) + shift.norm();
    Ok(TrialOutcome {
        value: -sum_log / T::from_usize_lossy(n),
        smallest,
        passed: smallest >= floor && largest <= ceiling,
    })
}

/// Empirical potential `-(1/n) E sum_j log s_j(X - zI - r xi I)` over
/// `trials` independent draws of `spec`.
///
/// With `truncate`, trials where `s_n < n^{-3}` or `s_1 > 4 + |z + r xi|`
/// are dropped from the average and counted in `excluded`.
pub fn empirical_potential<T: Real>(
    spec: &EnsembleSpec,
    z: Cx<T>,
    r: T,
    trials: usize,
    truncate: bool,
) -> Result<PotentialEstimate<T>> {
    spec.validate()?;
    empirical_potential_from(z, r, trials, truncate, |trial| {
        let s = spec.for_trial(Experiment::Potential, trial);
        Ok((sample_matrix::<T>(&s)?, s.seed))
    })
}

/// [`empirical_potential`] with a caller-supplied matrix source; `source`
/// maps a trial index to the matrix and the seed of its smoothing point.
pub fn empirical_potential_from<T, F>(
    z: Cx<T>,
    r: T,
    trials: usize,
    truncate: bool,
    source: F,
) -> Result<PotentialEstimate<T>>
where
    T: Real,
    F: Fn(u64) -> Result<(MatrixReal<T>, u64)> + Sync,
{
    if trials == 0 {
        return invalid("empirical potential needs at least one trial");
    }
    if !(r >= T::zero()) || !r.is_finite() {
        return invalid(format!("smoothing radius must be finite and >= 0, got {r}"));
    }
    let outcomes: Vec<TrialOutcome<T>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let (m, sseed) = source(t)?;
            if !m.is_square() || m.rows() == 0 {
                return invalid("potential source must produce non-empty square matrices");
            }
            potential_trial(&m, z, r, sseed)
        })
        .collect::<Result<_>>()?;
    let kept: Vec<bool> = outcomes.iter().map(|o| o.passed || !truncate).collect();
    let included = kept.iter().filter(|k| **k).count();
    if included == 0 {
        return Err(Error::AllTrialsExcluded { trials });
    }
    let mut sum = T::zero();
    for (o, k) in outcomes.iter().zip(&kept) {
        if *k {
            sum += o.value;
        }
    }
    let min_smallest_sv = outcomes.iter().map(|o| o.smallest).fold(T::infinity(), T::min);
    Ok(PotentialEstimate {
        value: sum / T::from_usize_lossy(included),
        trials,
        excluded: trials - included,
        min_smallest_sv,
        per_trial: outcomes.iter().map(|o| o.value).collect(),
        kept,
    })
}

/// `-2 int_0^inf log(y) p~(y) dy` on the solution's grid.
///
/// The first interval `[0, eps]` is integrated analytically,
/// `eps (log eps - 1)`, against the mean of the two endpoint densities.
pub fn limit_potential<T: Real>(sol: &LimitSolution<T>) -> T {
    let start = sol.x_grid.partition_point(|x| *x <= T::zero());
    let ys = &sol.x_grid[start..];
    let ps = &sol.density[start..];
    if ys.is_empty() {
        return T::zero();
    }
    let half = T::lit(0.5);
    // density at 0 from the nearest node at or left of 0 (the law is symmetric)
    let p0 = if start > 0 { sol.density[start - 1] } else { ps[0] };
    let eps = ys[0];
    let mut total = eps * (eps.ln() - T::one()) * (p0 + ps[0]) * half;
    for i in 1..ys.len() {
        let f0 = ys[i - 1].ln() * ps[i - 1];
        let f1 = ys[i].ln() * ps[i];
        total += (ys[i] - ys[i - 1]) * (f0 + f1) * half;
    }
    -T::lit(2.0) * total / sol.mass
}

/// [`limit_potential`] at `z` on the default grid.
pub fn limit_potential_at<T: Real>(z: Cx<T>) -> Result<T> {
    Ok(limit_potential(&density_default(z)?))
}

/// [`limit_potential`] at `z` on the fixed grid of `points` nodes over
/// `[-half_width, half_width]`.
pub fn limit_potential_on_grid<T: Real>(z: Cx<T>, half_width: T, points: usize) -> Result<T> {
    Ok(limit_potential(&density(z, &symmetric_grid(half_width, points))?))
}

/// Mean of `u` over `m_points` equispaced points of the circle
/// `|w - center| = rho`.
pub fn circular_mean<T: Real, F: Fn(Cx<T>) -> T>(u: F, center: Cx<T>, rho: T, m_points: usize) -> Result<T> {
    if !(rho > T::zero()) {
        return invalid(format!("circle radius must be positive, got {rho}"));
    }
    if m_points < 16 {
        return invalid(format!("circular mean needs at least 16 points, got {m_points}"));
    }
    let step = T::lit(2.0) * T::PI() / T::from_usize_lossy(m_points);
    let sum: T = (0..m_points)
        .map(|k| u(center + Cx::from_polar(rho, step * T::from_usize_lossy(k))))
        .sum();
    Ok(sum / T::from_usize_lossy(m_points))
}

/// `(1/n) sum_j exp(i (t Re l_j + v Im l_j))`.
pub fn empirical_char<T: Real>(values: &[Cx<T>], t: T, v: T) -> Cx<T> {
    if values.is_empty() {
        return Cx::new(T::zero(), T::zero());
    }
    let sum: Cx<T> = values
        .iter()
        .map(|l| Cx::from_polar(T::one(), t * l.re + v * l.im))
        .fold(Cx::new(T::zero(), T::zero()), |a, b| a + b);
    sum / T::from_usize_lossy(values.len())
}

/// Characteristic function of the uniform law on the disc of radius `r`,
/// `2 J_1(rho)/rho` with `rho = r sqrt(t^2 + v^2)`.
pub fn disc_char<T: Real>(t: T, v: T, r: T) -> Result<T> {
    if !(r >= T::zero()) {
        return invalid(format!("disc radius must be >= 0, got {r}"));
    }
    let rho = r * t.hypot(v);
    if !(rho <= T::lit(DISC_CHAR_MAX_RHO)) {
        return invalid(format!("disc characteristic function needs rho <= 30, got {rho}"));
    }
    // sum_k (-1)^k (rho/2)^{2k} / (k! (k+1)!)
    let q = rho * rho * T::lit(0.25);
    let mut term = T::one();
    let mut sum = T::one();
    for k in 1..200usize {
        term = -term * q / T::from_usize_lossy(k * (k + 1));
        sum += term;
        if term.abs() <= T::epsilon() * sum.abs().max(T::lit(1e-300)) && T::from_usize_lossy(k) > q.sqrt() {
            break;
        }
    }
    Ok(sum)
}

/// Outcome of the smoothing factorization check for characteristic
/// functions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CharCheck<T> {
    /// Mean over draws of the smoothed spectrum's characteristic function.
    pub smoothed: (T, T),
    /// Unsmoothed characteristic function times the disc factor.
    pub factored: (T, T),
    pub disc_factor: T,
    pub error: T,
    pub draws: usize,
}

/// Compares the draw-averaged characteristic function of the spectrum of
/// `X - r xi I` with that of `X` times the disc factor at `(t, v)`.
pub fn char_factorization<T: Real>(spec: &EnsembleSpec, r: T, t: T, v: T, draws: usize) -> Result<CharCheck<T>> {
    spec.validate()?;
    if draws == 0 {
        return invalid("factorization check needs at least one draw");
    }
    let m = sample_matrix::<T>(spec)?;
    let base = eigenvalues_with_retry(&m.to_complex())?;
    let h = disc_char(t, v, r)?;
    let zero = cx(T::zero(), T::zero());
    let chars: Vec<Cx<T>> = (0..draws as u64)
        .into_par_iter()
        .map(|d| {
            let sseed = derive_seed(spec.seed, &[Experiment::CharFactorization as u64, d]);
            let s = shifted_spectrum(&m, zero, r, sseed)?;
            Ok(empirical_char(&s.values, t, v))
        })
        .collect::<Result<_>>()?;
    let mean = chars.iter().fold(zero, |a, b| a + b) / T::from_usize_lossy(draws);
    let factored = empirical_char(&base.values, t, v) * h;
    Ok(CharCheck {
        smoothed: (mean.re, mean.im),
        factored: (factored.re, factored.im),
        disc_factor: h,
        error: (mean - factored).norm(),
        draws,
    })
}

/// What a [`PotentialGrid`] holds.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialKind {
    Empirical { n: usize, r: f64, trials: usize },
    Limit,
    DiscClosedForm,
}

impl PotentialKind {
    pub fn label(&self) -> &'static str {
        match self {
            PotentialKind::Empirical { .. } => "empirical",
            PotentialKind::Limit => "limit",
            PotentialKind::DiscClosedForm => "disc",
        }
    }
}

/// Potential values on a rectangular grid of shifts, row-major with the
/// imaginary part as the slow index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialGrid<T> {
    pub re: Vec<T>,
    pub im: Vec<T>,
    pub values: Vec<T>,
    /// Points where some trial had `s_n` below the truncation floor.
    pub flagged: Vec<bool>,
    /// Trials dropped by the truncation gates at each point.
    pub excluded: Vec<usize>,
    pub kind: PotentialKind,
}

impl<T: Real> PotentialGrid<T> {
    fn points(re: &[T], im: &[T]) -> Vec<Cx<T>> {
        im.iter().flat_map(|&y| re.iter().map(move |&x| cx(x, y))).collect()
    }

    pub fn disc(re: Vec<T>, im: Vec<T>) -> Self {
        let values: Vec<T> = Self::points(&re, &im).into_iter().map(disc_potential).collect();
        let flagged = vec![false; values.len()];
        let excluded = vec![0; values.len()];
        PotentialGrid { re, im, values, flagged, excluded, kind: PotentialKind::DiscClosedForm }
    }

    pub fn limit(re: Vec<T>, im: Vec<T>) -> Result<Self> {
        let values = Self::points(&re, &im)
            .into_par_iter()
            .map(limit_potential_at)
            .collect::<Result<Vec<T>>>()?;
        let flagged = vec![false; values.len()];
        let excluded = vec![0; values.len()];
        Ok(PotentialGrid { re, im, values, flagged, excluded, kind: PotentialKind::Limit })
    }

    /// Each grid point reuses the same trial matrices; the smoothing point
    /// of a trial is shared across the grid.
    pub fn empirical(spec: &EnsembleSpec, re: Vec<T>, im: Vec<T>, r: T, trials: usize, truncate: bool) -> Result<Self> {
        let floor = T::from_usize_lossy(spec.n).powi(-3);
        let mut values = Vec::new();
        let mut flagged = Vec::new();
        let mut excluded = Vec::new();
        for z in Self::points(&re, &im) {
            let est = empirical_potential(spec, z, r, trials, truncate)?;
            values.push(est.value);
            flagged.push(est.min_smallest_sv < floor);
            excluded.push(est.excluded);
        }
        let kind = PotentialKind::Empirical { n: spec.n, r: r.to_f64_lossy(), trials };
        Ok(PotentialGrid { re, im, values, flagged, excluded, kind })
    }

    /// CSV with header `re,im,U,kind`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("re,im,U,kind\n");
        for (z, u) in Self::points(&self.re, &self.im).iter().zip(&self.values) {
            s.push_str(&format!("{},{},{},{}\n", z.re, z.im, u, self.kind.label()));
        }
        s
    }
}
