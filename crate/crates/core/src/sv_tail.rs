//! Smallest-singular-value tails and the coordinate-profile diagnostics
//! behind small-ball estimates.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{Beta, ContinuousCDF};

use crate::ensemble::{sample_matrix, Distribution, EnsembleSpec};
use crate::error::{invalid, Error, Result};
use crate::rng::{stream, Experiment};
use crate::scalar::{Cx, Real};
use crate::spectra::shifted_singular_values;

/// Minimum number of trials for a tail estimate.
pub const MIN_TAIL_TRIALS: usize = 50;
/// Minimum number of trials for a small-ball estimate.
pub const MIN_SMALL_BALL_TRIALS: usize = 1000;
const SMALL_BALL_CHUNK: usize = 4096;

/// Two-sided Clopper-Pearson interval for `hits` successes in `trials`.
pub fn clopper_pearson(hits: usize, trials: usize, confidence: f64) -> (f64, f64) {
    assert!(hits <= trials && trials > 0);
    let alpha = 1.0 - confidence;
    let (k, n) = (hits as f64, trials as f64);
    let lower = if hits == 0 {
        0.0
    } else {
        Beta::new(k, n - k + 1.0).expect("positive shape").inverse_cdf(alpha / 2.0)
    };
    let upper = if hits == trials {
        1.0
    } else {
        Beta::new(k + 1.0, n - k).expect("positive shape").inverse_cdf(1.0 - alpha / 2.0)
    };
    (lower, upper)
}

/// Counts of trials with `s_n(X - zI)` at or below each threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailReport<T> {
    pub spec: EnsembleSpec,
    pub z_re: T,
    pub z_im: T,
    pub thresholds: Vec<T>,
    pub counts: Vec<usize>,
    pub trials: usize,
    /// `s_n` of every trial, in trial order.
    pub smallest: Vec<T>,
}

impl<T: Real> TailReport<T> {
    pub fn probabilities(&self) -> Vec<f64> {
        self.counts.iter().map(|c| *c as f64 / self.trials as f64).collect()
    }

    /// 95% Clopper-Pearson interval per threshold.
    pub fn intervals(&self) -> Vec<(f64, f64)> {
        self.counts.iter().map(|c| clopper_pearson(*c, self.trials, 0.95)).collect()
    }

    /// CSV with header `threshold,count,trials,probability,cp_lower,cp_upper`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("threshold,count,trials,probability,cp_lower,cp_upper\n");
        for ((t, c), (lo, hi)) in self.thresholds.iter().zip(&self.counts).zip(self.intervals()) {
            let p = *c as f64 / self.trials as f64;
            s.push_str(&format!("{t},{c},{},{p},{lo},{hi}\n", self.trials));
        }
        s
    }
}

/// Monte Carlo tail of the smallest singular value of `X - zI`.
pub fn smin_tail_estimate<T: Real>(
    spec: &EnsembleSpec,
    z: Cx<T>,
    thresholds: &[T],
    trials: usize,
) -> Result<TailReport<T>> {
    spec.validate()?;
    if trials < MIN_TAIL_TRIALS {
        return invalid(format!("tail estimate needs at least {MIN_TAIL_TRIALS} trials, got {trials}"));
    }
    if thresholds.is_empty() || thresholds.iter().any(|t| !(*t > T::zero()) || !t.is_finite()) {
        return invalid("tail thresholds must be positive and finite");
    }
    if thresholds.windows(2).any(|w| !(w[1] > w[0])) {
        return invalid("tail thresholds must be strictly ascending");
    }
    let smallest: Vec<T> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let s = spec.for_trial(Experiment::SminTail, t);
            let m = sample_matrix::<T>(&s)?;
            let sv = shifted_singular_values(&m, z, T::zero(), 0)?;
            Ok(sv[sv.len() - 1])
        })
        .collect::<Result<_>>()?;
    let counts = thresholds
        .iter()
        .map(|th| smallest.iter().filter(|s| **s <= *th).count())
        .collect();
    Ok(TailReport {
        spec: spec.clone(),
        z_re: z.re,
        z_im: z.im,
        thresholds: thresholds.to_vec(),
        counts,
        trials,
        smallest,
    })
}

/// Bucket counts `P_k = #{j : |x_j| in (k delta, (k+1) delta]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProfileCounts {
    pub buckets: BTreeMap<u64, usize>,
    /// Coordinates equal to zero, which fall in no bucket.
    pub zeros: usize,
}

impl ProfileCounts {
    pub fn total(&self) -> usize {
        self.buckets.values().sum()
    }

    /// `sum_{k >= 1} P_k^2`.
    pub fn sum_sq_from_one(&self) -> usize {
        self.buckets.iter().filter(|(k, _)| **k >= 1).map(|(_, c)| c * c).sum()
    }
}

fn bucket_of<T: Real>(a: T, delta: T) -> u64 {
    let mut k = ((a / delta).ceil() - T::one()).max(T::zero()).to_u64().unwrap_or(u64::MAX);
    // the quotient can land one bucket off when a is a multiple of delta
    while T::from_u64(k + 1).expect("u64") * delta < a {
        k += 1;
    }
    while k > 0 && T::from_u64(k).expect("u64") * delta >= a {
        k -= 1;
    }
    k
}

pub fn profile_counts<T: Real>(x: &[T], delta: T) -> Result<ProfileCounts> {
    if !(delta > T::zero()) || !delta.is_finite() {
        return invalid(format!("bucket width must be positive, got {delta}"));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return invalid("profile vector must be finite");
    }
    let mut buckets = BTreeMap::new();
    let mut zeros = 0;
    for v in x {
        let a = v.abs();
        if a == T::zero() {
            zeros += 1;
        } else {
            *buckets.entry(bucket_of(a, delta)).or_insert(0) += 1;
        }
    }
    Ok(ProfileCounts { buckets, zeros })
}

/// Coordinate moduli of a complex vector.
pub fn moduli<T: Real>(x: &[Cx<T>]) -> Vec<T> {
    x.iter().map(|c| c.norm()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileClass {
    Regular,
    Singular,
    CompressibleVP,
}

/// Parameters of the profile classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileParams {
    /// Outer cutoff `R`: coordinates above `R / sqrt(n p)` are "large".
    pub big_r: f64,
    /// Inner cutoff `r`, with `0 < r < R`.
    pub small_r: f64,
    /// Bucket width; `r / (4 pi sqrt n)` when unset.
    pub delta: Option<f64>,
    pub q: f64,
    pub p_n: f64,
    /// Constant in front of the alternative budget `C Q m^2 / k`.
    pub c_budget: f64,
}

impl Default for ProfileParams {
    fn default() -> Self {
        ProfileParams { big_r: 1.0, small_r: 0.9, delta: None, q: 10.0, p_n: 1.0, c_budget: 1.0 }
    }
}

impl ProfileParams {
    pub fn delta_for(&self, n: usize) -> f64 {
        self.delta
            .unwrap_or(self.small_r / (4.0 * std::f64::consts::PI * (n as f64).sqrt()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileReport {
    pub n: usize,
    pub delta: f64,
    /// Indices with `|x_j| <= R / sqrt(n p)`.
    pub sigma_set: Vec<usize>,
    pub sigma_norm: f64,
    /// `m = max(1, r^2 n / (2 R^2 p))`.
    pub m: f64,
    /// Size of the selected set, `ceil(m / 2)`.
    pub half_m: usize,
    /// Number of indices with `r/(2 sqrt n) <= |x_j| <= R/sqrt(n p)`.
    pub candidates: usize,
    /// Selected indices: the `half_m` largest candidates.
    pub selected: Vec<usize>,
    pub counts: Option<ProfileCounts>,
    pub sum_sq: f64,
    /// `Q m^{5/2} delta`.
    pub budget: f64,
    /// `C Q m^2 / k` with `k = floor((R/sqrt p - r/2) / (sqrt n delta))`.
    pub alt_budget: f64,
    pub classification: ProfileClass,
}

/// Slack on the closed interval cutoffs, so `1/sqrt(n)` built two ways
/// compares equal.
const CUTOFF_SLACK: f64 = 1e-12;

pub fn classify_profile<T: Real>(x: &[T], params: &ProfileParams) -> Result<ProfileReport> {
    let n = x.len();
    if n == 0 {
        return invalid("profile vector must be non-empty");
    }
    let xs: Vec<f64> = x.iter().map(|v| v.to_f64_lossy().abs()).collect();
    let norm = xs.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !((norm - 1.0).abs() <= 1e-9) {
        return invalid(format!("profile vector must have unit norm, got {norm}"));
    }
    let ProfileParams { big_r, small_r, q, p_n, c_budget, .. } = *params;
    if !(small_r > 0.0 && small_r < big_r) {
        return invalid(format!("need 0 < r < R, got r = {small_r}, R = {big_r}"));
    }
    if !(p_n > 0.0 && p_n <= 1.0) {
        return invalid(format!("p_n must lie in (0, 1], got {p_n}"));
    }
    if !(q > 0.0) {
        return invalid(format!("Q must be positive, got {q}"));
    }
    let nf = n as f64;
    let delta = params.delta_for(n);
    let inner = small_r / (2.0 * nf.sqrt());
    if !(delta > 0.0 && delta < inner) {
        return invalid(format!("bucket width must lie in (0, r/(2 sqrt n)) = (0, {inner}), got {delta}"));
    }
    let outer = big_r / (nf * p_n).sqrt() * (1.0 + CUTOFF_SLACK);
    let sigma_set: Vec<usize> = (0..n).filter(|&j| xs[j] <= outer).collect();
    let sigma_norm = sigma_set.iter().map(|&j| xs[j] * xs[j]).sum::<f64>().sqrt();
    let m = (small_r * small_r * nf / (2.0 * big_r * big_r * p_n)).max(1.0);
    let half_m = (m / 2.0).ceil() as usize;
    let k_cover = ((big_r / p_n.sqrt() - small_r / 2.0) / (nf.sqrt() * delta)).floor().max(1.0);
    let budget = q * m.powf(2.5) * delta;
    let alt_budget = c_budget * q * m * m / k_cover;
    let mut report = ProfileReport {
        n,
        delta,
        sigma_set,
        sigma_norm,
        m,
        half_m,
        candidates: 0,
        selected: Vec::new(),
        counts: None,
        sum_sq: 0.0,
        budget,
        alt_budget,
        classification: ProfileClass::CompressibleVP,
    };
    if sigma_norm < small_r {
        return Ok(report);
    }
    let lower = inner * (1.0 - CUTOFF_SLACK);
    let mut cands: Vec<usize> = (0..n).filter(|&j| xs[j] >= lower && xs[j] <= outer).collect();
    report.candidates = cands.len();
    if cands.len() < half_m {
        return Err(Error::Structural { found: cands.len(), needed: half_m });
    }
    cands.sort_by(|&a, &b| xs[b].partial_cmp(&xs[a]).expect("finite").then(a.cmp(&b)));
    cands.truncate(half_m);
    cands.sort_unstable();
    let restricted: Vec<f64> = cands.iter().map(|&j| xs[j]).collect();
    let counts = profile_counts(&restricted, delta)?;
    report.sum_sq = counts.sum_sq_from_one() as f64;
    report.classification = if report.sum_sq <= budget { ProfileClass::Regular } else { ProfileClass::Singular };
    report.selected = cands;
    report.counts = Some(counts);
    Ok(report)
}

/// Shape of the small-ball bound, `C (n p)^{-5/2} sum_{k >= 1} P_k^2`.
pub fn small_ball_bound(counts: &ProfileCounts, n: usize, p_n: f64, c: f64) -> f64 {
    c * (n as f64 * p_n).powf(-2.5) * counts.sum_sq_from_one() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmallBallEstimate {
    pub estimate: f64,
    pub hits: usize,
    pub trials: usize,
    pub cp_lower: f64,
    pub cp_upper: f64,
}

/// Monte Carlo `Pr{|sum_j eps_j beta_j x_j - v| < delta}` with `beta_j`
/// drawn from `dist` and `eps_j` Bernoulli(`p_n`).
pub fn small_ball_prob<T: Real>(
    x: &[T],
    dist: &Distribution,
    delta: T,
    v: T,
    p_n: f64,
    trials: usize,
    seed: u64,
) -> Result<SmallBallEstimate> {
    dist.validate()?;
    if trials < MIN_SMALL_BALL_TRIALS {
        return invalid(format!("small-ball estimate needs at least {MIN_SMALL_BALL_TRIALS} trials, got {trials}"));
    }
    if !(delta > T::zero()) {
        return invalid(format!("small-ball radius must be positive, got {delta}"));
    }
    if !(p_n > 0.0 && p_n <= 1.0) {
        return invalid(format!("p_n must lie in (0, 1], got {p_n}"));
    }
    let xs: Vec<f64> = x.iter().map(|c| c.to_f64_lossy()).collect();
    let (delta, v) = (delta.to_f64_lossy(), v.to_f64_lossy());
    let chunks = trials.div_ceil(SMALL_BALL_CHUNK);
    let hits: usize = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(seed, Experiment::SmallBall, c as u64);
            let len = SMALL_BALL_CHUNK.min(trials - c * SMALL_BALL_CHUNK);
            let mut hits = 0usize;
            for _ in 0..len {
                let mut sum = 0.0;
                for xj in &xs {
                    let on = p_n >= 1.0 || rng.random::<f64>() < p_n;
                    let b = dist.sample(&mut rng);
                    if on {
                        sum += b * xj;
                    }
                }
                if (sum - v).abs() < delta {
                    hits += 1;
                }
            }
            hits
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    let (cp_lower, cp_upper) = clopper_pearson(hits, trials, 0.95);
    Ok(SmallBallEstimate { estimate: hits as f64 / trials as f64, hits, trials, cp_lower, cp_upper })
}
