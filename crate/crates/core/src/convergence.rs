//! Distances between empirical objects and their limits, and sweeps of
//! those distances across matrix sizes and sparsity levels.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{sample_matrix, Distribution, EnsembleSpec};
use crate::error::{invalid, Error, Result};
use crate::limit_law::{density_default, mp_cdf, LimitSolution};
use crate::rng::{derive_seed, Experiment};
use crate::scalar::{cx, Real};
use crate::spectra::{eigenvalues_with_retry, squared_sv_measure, ComplexSpectrum, EmpiricalCdf};

/// `sup_x |F(x) - G(x)|` for an empirical `F` and a continuous `G`,
/// evaluated at the jumps of `F`.
pub fn kolmogorov_distance<T: Real, G: Fn(T) -> T>(f: &EmpiricalCdf<T>, g: G) -> T {
    let n = T::from_usize_lossy(f.len());
    f.points()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let gx = g(x);
            let above = T::from_usize_lossy(i + 1) / n;
            let below = T::from_usize_lossy(i) / n;
            (above - gx).abs().max((below - gx).abs())
        })
        .fold(T::zero(), T::max)
}

/// Radial and angular Kolmogorov distances of a spectrum to the uniform
/// law on the unit disc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscDistance<T> {
    /// Distance of `|lambda|` to `min(rho^2, 1)`.
    pub radial: T,
    /// Distance of the angles to the uniform law.
    pub angular: T,
    /// Spectra of real matrices are conjugation-symmetric, so their angles
    /// are folded to `|arg lambda|` and compared to uniform on `[0, pi]`.
    pub folded: bool,
}

pub fn circular_law_distance<T: Real>(spec: &ComplexSpectrum<T>) -> Result<DiscDistance<T>> {
    if spec.len() < 8 {
        return invalid(format!("circular-law distance needs at least 8 eigenvalues, got {}", spec.len()));
    }
    let radii = EmpiricalCdf::new(spec.values.iter().map(|v| v.norm()).collect())?;
    let radial = kolmogorov_distance(&radii, |r: T| (r * r).min(T::one()));
    let folded = spec.meta.real_source;
    let angular = if folded {
        let a = EmpiricalCdf::new(spec.values.iter().map(|v| v.arg().abs()).collect())?;
        kolmogorov_distance(&a, |t: T| (t / T::PI()).max(T::zero()).min(T::one()))
    } else {
        let a = EmpiricalCdf::new(spec.values.iter().map(|v| v.arg()).collect())?;
        let two_pi = T::lit(2.0) * T::PI();
        kolmogorov_distance(&a, move |t: T| ((t + T::PI()) / two_pi).max(T::zero()).min(T::one()))
    };
    Ok(DiscDistance { radial, angular, folded })
}

/// Median of finite values (mean of the middle pair for even length).
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of an empty slice");
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let k = v.len() / 2;
    if v.len() % 2 == 1 {
        v[k]
    } else {
        0.5 * (v[k - 1] + v[k])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DistanceKind {
    /// Squared singular values of `X - zI` against the limiting law at `z`.
    #[serde(rename = "sv-vs-limit")]
    SvVsLimit,
    /// Eigenvalue moduli against the disc law.
    #[serde(rename = "radial")]
    Radial,
    /// Eigenvalue angles against the uniform law.
    #[serde(rename = "angular")]
    Angular,
    /// Squared singular values of `X - zI` against Marchenko-Pastur.
    #[serde(rename = "mp")]
    Mp,
}

impl DistanceKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            DistanceKind::SvVsLimit => "sv-vs-limit",
            DistanceKind::Radial => "radial",
            DistanceKind::Angular => "angular",
            DistanceKind::Mp => "mp",
        }
    }

    fn needs_eigenvalues(&self) -> bool {
        matches!(self, DistanceKind::Radial | DistanceKind::Angular)
    }
}

impl fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DistanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "sv-vs-limit" => Ok(DistanceKind::SvVsLimit),
            "radial" => Ok(DistanceKind::Radial),
            "angular" => Ok(DistanceKind::Angular),
            "mp" => Ok(DistanceKind::Mp),
            other => invalid(format!("unknown distance kind {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateConfig {
    pub n_list: Vec<usize>,
    pub p_list: Vec<f64>,
    /// Shifts as `(re, im)`.
    pub z_list: Vec<(f64, f64)>,
    pub trials: usize,
    pub kinds: Vec<DistanceKind>,
    pub dist: Distribution,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRow {
    pub n: usize,
    pub p_n: f64,
    pub re_z: f64,
    pub im_z: f64,
    pub kind: DistanceKind,
    pub trials: usize,
    pub mean_distance: f64,
    /// Per-trial distances, in trial order.
    pub distances: Vec<f64>,
    pub slope_group_id: usize,
    /// Seed of the cell, reproducible from the sweep seed, `n`, `p_n` and `z`.
    pub cell_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeFit {
    pub group_id: usize,
    pub p_n: f64,
    pub re_z: f64,
    pub im_z: f64,
    pub kind: DistanceKind,
    /// Least-squares slope of `log distance` against `log(n p_n)`.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub cells: usize,
    /// Why the slope was omitted, if it was.
    pub flag: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateTable {
    pub rows: Vec<RateRow>,
    pub slopes: Vec<SlopeFit>,
    pub distribution: String,
    pub kappa3: f64,
    pub seed: u64,
}

impl RateTable {
    /// CSV with header
    /// `n,p_n,re_z,im_z,kind,trials,mean_distance,slope_group_id`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,p_n,re_z,im_z,kind,trials,mean_distance,slope_group_id\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.n, r.p_n, r.re_z, r.im_z, r.kind, r.trials, r.mean_distance, r.slope_group_id
            ));
        }
        s
    }
}

/// Seed of the sweep cell `(n, p_n, z)`.
pub fn cell_seed(seed: u64, n: usize, p_n: f64, z: (f64, f64)) -> u64 {
    derive_seed(seed, &[n as u64, p_n.to_bits(), z.0.to_bits(), z.1.to_bits()])
}

type GroupKey = (u64, u64, u64, DistanceKind);

fn group_key(r: &RateRow) -> GroupKey {
    (r.p_n.to_bits(), r.re_z.to_bits(), r.im_z.to_bits(), r.kind)
}

/// Assigns group ids by first appearance of `(p_n, z, kind)` and fits one
/// log-log slope per group from the rows' mean distances.
pub fn fit_slopes(rows: &mut [RateRow]) -> Vec<SlopeFit> {
    let mut ids: HashMap<GroupKey, usize> = HashMap::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    for (i, r) in rows.iter_mut().enumerate() {
        let next = ids.len();
        let id = *ids.entry(group_key(r)).or_insert(next);
        if id == members.len() {
            members.push(Vec::new());
        }
        members[id].push(i);
        r.slope_group_id = id;
    }
    members
        .iter()
        .enumerate()
        .map(|(id, idx)| {
            let first = &rows[idx[0]];
            let mut fit = SlopeFit {
                group_id: id,
                p_n: first.p_n,
                re_z: first.re_z,
                im_z: first.im_z,
                kind: first.kind,
                slope: None,
                intercept: None,
                cells: idx.len(),
                flag: None,
            };
            let pts: Vec<(f64, f64)> = idx
                .iter()
                .map(|&i| ((rows[i].n as f64 * rows[i].p_n).ln(), rows[i].mean_distance))
                .collect();
            if pts.iter().any(|(_, d)| !(*d > 0.0)) {
                fit.flag = Some("non-positive distance".into());
                return fit;
            }
            let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
            let k = xs.len() as f64;
            let mx = xs.iter().sum::<f64>() / k;
            let my = ys.iter().sum::<f64>() / k;
            let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
            if xs.len() < 2 || !(sxx > 0.0) {
                fit.flag = Some("insufficient cells".into());
                return fit;
            }
            let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
            let slope = sxy / sxx;
            fit.slope = Some(slope);
            fit.intercept = Some(my - slope * mx);
            fit
        })
        .collect()
}

fn validate_config(cfg: &RateConfig) -> Result<()> {
    cfg.dist.validate()?;
    if cfg.n_list.len() < 2 {
        return invalid("rate sweep needs at least two matrix sizes");
    }
    if cfg.n_list.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("matrix sizes must be strictly ascending");
    }
    if cfg.trials == 0 {
        return invalid("rate sweep needs at least one trial");
    }
    if cfg.p_list.is_empty() || cfg.p_list.iter().any(|p| !(*p > 0.0 && *p <= 1.0)) {
        return invalid("sparsity levels must lie in (0, 1]");
    }
    if cfg.z_list.is_empty() || cfg.z_list.iter().any(|z| !z.0.is_finite() || !z.1.is_finite()) {
        return invalid("shifts must be finite");
    }
    if cfg.kinds.is_empty() {
        return invalid("rate sweep needs at least one distance kind");
    }
    if cfg.kinds.iter().any(|k| k.needs_eigenvalues()) && cfg.n_list[0] < 8 {
        return invalid("eigenvalue distances need n >= 8");
    }
    Ok(())
}

struct Cell {
    n: usize,
    p_n: f64,
    z: (f64, f64),
    seed: u64,
}

fn trial_distances(
    cell: &Cell,
    trial: u64,
    cfg: &RateConfig,
    limits: &HashMap<(u64, u64), LimitSolution<f64>>,
) -> Result<Vec<f64>> {
    let spec = EnsembleSpec::new(cell.n, cfg.dist.clone(), cell.p_n, cell.seed)?.for_trial(Experiment::Convergence, trial);
    let m = sample_matrix::<f64>(&spec)?;
    let z = cx(cell.z.0, cell.z.1);
    let needs_sv = cfg.kinds.iter().any(|k| !k.needs_eigenvalues());
    let sq = if needs_sv { Some(squared_sv_measure(&m, z, 0.0, 0)?) } else { None };
    let disc = if cfg.kinds.iter().any(|k| k.needs_eigenvalues()) {
        Some(circular_law_distance(&eigenvalues_with_retry(&m.to_complex())?)?)
    } else {
        None
    };
    cfg.kinds
        .iter()
        .map(|k| {
            Ok(match k {
                DistanceKind::SvVsLimit => {
                    let sol = &limits[&(cell.z.0.to_bits(), cell.z.1.to_bits())];
                    kolmogorov_distance(sq.as_ref().expect("computed"), |x| sol.squared_cdf_at(x))
                }
                DistanceKind::Mp => kolmogorov_distance(sq.as_ref().expect("computed"), mp_cdf),
                DistanceKind::Radial => disc.expect("computed").radial,
                DistanceKind::Angular => disc.expect("computed").angular,
            })
        })
        .collect()
}

/// Mean distances per `(n, p_n, z, kind)` cell and log-log slopes per
/// `(p_n, z, kind)` group. Rows are ordered by `p_n`, then `z`, then kind,
/// then `n`, each in configuration order.
pub fn rate_sweep(cfg: &RateConfig) -> Result<RateTable> {
    validate_config(cfg)?;
    let mut limits = HashMap::new();
    if cfg.kinds.contains(&DistanceKind::SvVsLimit) {
        for z in &cfg.z_list {
            limits.insert((z.0.to_bits(), z.1.to_bits()), density_default(cx(z.0, z.1))?);
        }
    }
    let mut cells = Vec::new();
    for &p_n in &cfg.p_list {
        for &z in &cfg.z_list {
            for &n in &cfg.n_list {
                cells.push(Cell { n, p_n, z, seed: cell_seed(cfg.seed, n, p_n, z) });
            }
        }
    }
    let jobs: Vec<(usize, u64)> = (0..cells.len())
        .flat_map(|c| (0..cfg.trials as u64).map(move |t| (c, t)))
        .collect();
    let results: Vec<Vec<f64>> = jobs
        .par_iter()
        .map(|&(c, t)| trial_distances(&cells[c], t, cfg, &limits))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let nk = cfg.kinds.len();
    let nn = cfg.n_list.len();
    for (block, chunk) in cells.chunks(nn).enumerate() {
        for (ki, &kind) in cfg.kinds.iter().enumerate() {
            for (ci, cell) in chunk.iter().enumerate() {
                let c = block * nn + ci;
                let distances: Vec<f64> = (0..cfg.trials).map(|t| results[c * cfg.trials + t][ki]).collect();
                let mean_distance = distances.iter().sum::<f64>() / cfg.trials as f64;
                rows.push(RateRow {
                    n: cell.n,
                    p_n: cell.p_n,
                    re_z: cell.z.0,
                    im_z: cell.z.1,
                    kind,
                    trials: cfg.trials,
                    mean_distance,
                    distances,
                    slope_group_id: 0,
                    cell_seed: cell.seed,
                });
            }
        }
    }
    debug_assert_eq!(rows.len(), cells.len() * nk);
    let slopes = fit_slopes(&mut rows);
    Ok(RateTable {
        rows,
        slopes,
        distribution: cfg.dist.name(),
        kappa3: cfg.dist.kappa3(),
        seed: cfg.seed,
    })
}
