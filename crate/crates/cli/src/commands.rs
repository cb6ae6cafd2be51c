//! Subcommand parameters and runners. Each runner returns the summary and
//! the files to write; nothing touches the filesystem here.

use circlaw::convergence::{circular_law_distance, rate_sweep, DistanceKind, RateConfig};
use circlaw::ensemble::{sample_matrix, Distribution, EnsembleSpec};
use circlaw::limit_law::{density, default_grid, support_thresholds};
use circlaw::potential::{
    char_factorization, default_smoothing_radius, disc_char, disc_potential, limit_potential, PotentialGrid,
};
use circlaw::Complex;
use circlaw::spectra::{shifted_singular_values, shifted_spectrum};
use circlaw::sv_tail::{
    classify_profile, profile_counts, small_ball_bound, small_ball_prob, smin_tail_estimate, ProfileParams,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{ComplexValue, Globals};
use crate::CliError;

pub struct Outcome {
    pub summary: Value,
    /// `(file name, contents)` pairs, written inside the output directory.
    pub files: Vec<(String, String)>,
}

fn parse_dist(s: &str) -> Result<Distribution, CliError> {
    s.parse().map_err(|e: circlaw::Error| CliError::Validation(e.to_string()))
}

fn check(cond: bool, msg: impl Into<String>) -> Result<(), CliError> {
    if cond {
        Ok(())
    } else {
        Err(CliError::Validation(msg.into()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateParams {
    pub n: usize,
    pub dist: String,
    pub p: f64,
    pub z: ComplexValue,
    pub r: f64,
}

impl Default for SimulateParams {
    fn default() -> Self {
        SimulateParams { n: 64, dist: "gaussian".into(), p: 1.0, z: ComplexValue(0.0, 0.0), r: 0.0 }
    }
}

/// Eigenvalues and singular values of one draw of `X - zI - r xi I`.
pub fn simulate(g: &Globals, p: &SimulateParams) -> Result<Outcome, CliError> {
    check(p.r >= 0.0 && p.r.is_finite(), format!("r must be finite and >= 0, got {}", p.r))?;
    let spec = EnsembleSpec::new(p.n, parse_dist(&p.dist)?, p.p, g.seed)?;
    let m = sample_matrix::<f64>(&spec)?;
    let z = Complex::new(p.z.0, p.z.1);
    let spectrum = shifted_spectrum(&m, z, p.r, g.seed)?;
    let sv = shifted_singular_values(&m, z, p.r, g.seed)?;
    let mut sv_csv = String::from("index,s\n");
    for (i, s) in sv.iter().enumerate() {
        sv_csv.push_str(&format!("{i},{s}\n"));
    }
    let disc = if spectrum.len() >= 8 { Some(circular_law_distance(&spectrum)?) } else { None };
    let mut files = vec![("simulate.csv".to_string(), spectrum.to_csv()), ("simulate_sv.csv".to_string(), sv_csv)];
    if g.plot_data {
        let mut radii: Vec<f64> = spectrum.values.iter().map(|v| v.norm()).collect();
        radii.sort_by(|a, b| a.total_cmp(b));
        let mut s = String::from("x,y\n");
        for (i, r) in radii.iter().enumerate() {
            s.push_str(&format!("{r},{}\n", (i + 1) as f64 / radii.len() as f64));
        }
        files.push(("simulate_plot.csv".into(), s));
    }
    let summary = json!({
        "eigenvalues": spectrum.len(),
        "log_abs_det": spectrum.log_abs_prod(),
        "largest_sv": sv[0],
        "smallest_sv": sv[sv.len() - 1],
        "kappa3": spec.kappa3(),
        "disc_distance": disc,
    });
    Ok(Outcome { summary, files })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LimitParams {
    pub z: ComplexValue,
    pub grid: usize,
    pub margin: f64,
}

impl Default for LimitParams {
    fn default() -> Self {
        LimitParams { z: ComplexValue(0.0, 0.0), grid: 2001, margin: 0.5 }
    }
}

/// Limiting density and distribution function of the symmetrized law.
pub fn limit(g: &Globals, p: &LimitParams) -> Result<Outcome, CliError> {
    check(p.grid >= 3, format!("grid needs at least 3 points, got {}", p.grid))?;
    check(p.margin >= 0.0 && p.margin.is_finite(), format!("margin must be >= 0, got {}", p.margin))?;
    let z = Complex::new(p.z.0, p.z.1);
    let sol = density(z, &default_grid(z, p.grid, p.margin))?;
    let mut files = vec![("limit.csv".to_string(), sol.to_csv())];
    if g.plot_data {
        let mut s = String::from("x,y\n");
        for (x, d) in sol.x_grid.iter().zip(&sol.density) {
            s.push_str(&format!("{x},{d}\n"));
        }
        files.push(("limit_plot.csv".into(), s));
    }
    let (x1, x2) = support_thresholds(z);
    let summary = json!({
        "x1": x1,
        "x2": x2,
        "mass": sol.mass,
        "potential": limit_potential(&sol),
        "disc_potential": disc_potential(z),
    });
    Ok(Outcome { summary, files })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PotentialParams {
    pub n: usize,
    pub dist: String,
    pub p: f64,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    /// Smoothing radius; `n^{-1/8}` when unset.
    pub r: Option<f64>,
    pub trials: usize,
    pub truncate: bool,
    pub kinds: Vec<String>,
}

impl Default for PotentialParams {
    fn default() -> Self {
        PotentialParams {
            n: 256,
            dist: "gaussian".into(),
            p: 1.0,
            re: vec![0.0, 0.5, 1.5],
            im: vec![0.0],
            r: None,
            trials: 20,
            truncate: true,
            kinds: vec!["empirical".into(), "limit".into(), "disc".into()],
        }
    }
}

/// Empirical, limiting and closed-form potentials on a grid of shifts.
pub fn potential(g: &Globals, p: &PotentialParams) -> Result<Outcome, CliError> {
    check(!p.re.is_empty() && !p.im.is_empty(), "potential grid needs at least one re and one im value")?;
    check(p.re.iter().chain(&p.im).all(|v| v.is_finite()), "grid coordinates must be finite")?;
    let r = p.r.unwrap_or_else(|| default_smoothing_radius(p.n.max(1)));
    let mut grids = Vec::new();
    for kind in &p.kinds {
        let grid = match kind.as_str() {
            "empirical" => {
                let spec = EnsembleSpec::new(p.n, parse_dist(&p.dist)?, p.p, g.seed)?;
                PotentialGrid::empirical(&spec, p.re.clone(), p.im.clone(), r, p.trials, p.truncate)?
            }
            "limit" => PotentialGrid::limit(p.re.clone(), p.im.clone())?,
            "disc" => PotentialGrid::disc(p.re.clone(), p.im.clone()),
            other => return Err(CliError::Validation(format!("unknown potential kind {other:?}"))),
        };
        grids.push(grid);
    }
    let mut csv = String::from("re,im,U,kind\n");
    let mut files = Vec::new();
    for grid in &grids {
        csv.push_str(grid.to_csv().split_once('\n').map(|(_, rows)| rows).unwrap_or(""));
        if g.plot_data {
            let mut s = String::from("re,im,value\n");
            for line in grid.to_csv().lines().skip(1) {
                let cols: Vec<&str> = line.split(',').collect();
                s.push_str(&format!("{},{},{}\n", cols[0], cols[1], cols[2]));
            }
            files.push((format!("potential_{}_plot.csv", grid.kind.label()), s));
        }
    }
    files.insert(0, ("potential.csv".into(), csv));
    let summary = json!({ "r": r, "grids": grids });
    Ok(Outcome { summary, files })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SvTailParams {
    /// `tail`, `small-ball` or `profile`.
    pub mode: String,
    pub n: usize,
    pub dist: String,
    pub p: f64,
    pub z: ComplexValue,
    pub trials: Option<usize>,
    /// Tail thresholds are `gamma / (c n^2)`.
    pub gammas: Vec<f64>,
    pub c: f64,
    /// Coefficient vector for `small-ball` and `profile`.
    pub x: Option<Vec<f64>>,
    pub delta: Option<f64>,
    pub v: f64,
    pub big_r: f64,
    pub small_r: f64,
    pub q: f64,
}

impl Default for SvTailParams {
    fn default() -> Self {
        let d = ProfileParams::default();
        SvTailParams {
            mode: "tail".into(),
            n: 64,
            dist: "gaussian".into(),
            p: 1.0,
            z: ComplexValue(0.5, 0.0),
            trials: None,
            gammas: vec![1e-4, 1e-3, 1e-2, 1e-1, 1.0],
            c: 1.0,
            x: None,
            delta: None,
            v: 0.0,
            big_r: d.big_r,
            small_r: d.small_r,
            q: d.q,
        }
    }
}

/// Smallest-singular-value tails, small-ball probabilities and profiles.
pub fn svtail(g: &Globals, p: &SvTailParams) -> Result<Outcome, CliError> {
    match p.mode.as_str() {
        "tail" => tail(g, p),
        "small-ball" => small_ball(g, p),
        "profile" => profile(p),
        other => Err(CliError::Validation(format!("unknown svtail mode {other:?}"))),
    }
}

fn tail(g: &Globals, p: &SvTailParams) -> Result<Outcome, CliError> {
    check(p.c > 0.0, format!("c must be positive, got {}", p.c))?;
    let spec = EnsembleSpec::new(p.n, parse_dist(&p.dist)?, p.p, g.seed)?;
    let scale = p.c * (p.n as f64).powi(2);
    let thresholds: Vec<f64> = p.gammas.iter().map(|gm| gm / scale).collect();
    let report = smin_tail_estimate(&spec, Complex::new(p.z.0, p.z.1), &thresholds, p.trials.unwrap_or(500))?;
    let mut csv = String::from("gamma,threshold,count,trials,probability,cp_lower,cp_upper\n");
    let probs = report.probabilities();
    for (i, (lo, hi)) in report.intervals().into_iter().enumerate() {
        csv.push_str(&format!(
            "{},{},{},{},{},{lo},{hi}\n",
            p.gammas[i], report.thresholds[i], report.counts[i], report.trials, probs[i]
        ));
    }
    let mut files = vec![("svtail.csv".to_string(), csv)];
    if g.plot_data {
        let mut s: Vec<f64> = report.smallest.clone();
        s.sort_by(|a, b| a.total_cmp(b));
        let mut out = String::from("x,y\n");
        for (i, v) in s.iter().enumerate() {
            out.push_str(&format!("{v},{}\n", (i + 1) as f64 / s.len() as f64));
        }
        files.push(("svtail_plot.csv".into(), out));
    }
    let summary = json!({
        "mode": "tail",
        "trials": report.trials,
        "thresholds": report.thresholds,
        "counts": report.counts,
        "intervals": report.intervals(),
        "min_smallest_sv": report.smallest.iter().cloned().fold(f64::INFINITY, f64::min),
    });
    Ok(Outcome { summary, files })
}

fn unit_vector(p: &SvTailParams, fallback: Vec<f64>) -> Vec<f64> {
    p.x.clone().unwrap_or(fallback)
}

fn small_ball(g: &Globals, p: &SvTailParams) -> Result<Outcome, CliError> {
    let x = unit_vector(p, vec![std::f64::consts::FRAC_1_SQRT_2; 2]);
    check(!x.is_empty(), "coefficient vector must be non-empty")?;
    let delta = p.delta.unwrap_or(0.1);
    let est = small_ball_prob(&x, &parse_dist(&p.dist)?, delta, p.v, p.p, p.trials.unwrap_or(10_000), g.seed)?;
    let counts = profile_counts(&x, delta)?;
    let bound = small_ball_bound(&counts, x.len(), p.p, p.c);
    let csv = format!(
        "estimate,hits,trials,cp_lower,cp_upper,bound_shape\n{},{},{},{},{},{}\n",
        est.estimate, est.hits, est.trials, est.cp_lower, est.cp_upper, bound
    );
    let summary = json!({ "mode": "small-ball", "estimate": est, "bound_shape": bound, "profile": counts });
    Ok(Outcome { summary, files: vec![("svtail.csv".into(), csv)] })
}

fn profile(p: &SvTailParams) -> Result<Outcome, CliError> {
    let x = unit_vector(p, vec![1.0 / (p.n as f64).sqrt(); p.n]);
    let params = ProfileParams {
        big_r: p.big_r,
        small_r: p.small_r,
        delta: p.delta,
        q: p.q,
        p_n: p.p,
        c_budget: p.c,
    };
    let report = classify_profile(&x, &params)?;
    let mut csv = String::from("k,count\n");
    if let Some(c) = &report.counts {
        for (k, n) in &c.buckets {
            csv.push_str(&format!("{k},{n}\n"));
        }
    }
    let summary = json!({ "mode": "profile", "report": report });
    Ok(Outcome { summary, files: vec![("svtail.csv".into(), csv)] })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergeParams {
    pub n: Vec<usize>,
    pub p: Vec<f64>,
    pub z: Vec<ComplexValue>,
    pub trials: usize,
    pub kinds: Vec<String>,
    pub dist: String,
}

impl Default for ConvergeParams {
    fn default() -> Self {
        ConvergeParams {
            n: vec![64, 128, 256],
            p: vec![1.0],
            z: vec![ComplexValue(0.5, 0.0)],
            trials: 10,
            kinds: vec!["sv-vs-limit".into()],
            dist: "gaussian".into(),
        }
    }
}

/// Distance-to-limit sweep over sizes, sparsity levels and shifts.
pub fn converge(g: &Globals, p: &ConvergeParams) -> Result<Outcome, CliError> {
    let kinds = p
        .kinds
        .iter()
        .map(|k| k.parse::<DistanceKind>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let cfg = RateConfig {
        n_list: p.n.clone(),
        p_list: p.p.clone(),
        z_list: p.z.iter().map(|z| (z.0, z.1)).collect(),
        trials: p.trials,
        kinds,
        dist: parse_dist(&p.dist)?,
        seed: g.seed,
    };
    let table = rate_sweep(&cfg)?;
    let mut files = vec![("converge.csv".to_string(), table.to_csv())];
    if g.plot_data {
        let mut s = String::from("x,y,slope_group_id\n");
        for r in &table.rows {
            s.push_str(&format!("{},{},{}\n", (r.n as f64 * r.p_n).ln(), r.mean_distance.ln(), r.slope_group_id));
        }
        files.push(("converge_plot.csv".into(), s));
    }
    let summary = json!({
        "slopes": table.slopes,
        "rows": table.rows.len(),
        "distribution": table.distribution,
        "kappa3": table.kappa3,
    });
    Ok(Outcome { summary, files })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CharParams {
    pub n: usize,
    pub dist: String,
    pub p: f64,
    pub r: f64,
    pub t: f64,
    pub v: f64,
    pub draws: usize,
}

impl Default for CharParams {
    fn default() -> Self {
        CharParams { n: 64, dist: "gaussian".into(), p: 1.0, r: 0.3, t: 1.0, v: 1.0, draws: 200 }
    }
}

/// Characteristic-function factorization under disc smoothing.
pub fn char_check(g: &Globals, p: &CharParams) -> Result<Outcome, CliError> {
    let spec = EnsembleSpec::new(p.n, parse_dist(&p.dist)?, p.p, g.seed)?;
    let c = char_factorization(&spec, p.r, p.t, p.v, p.draws)?;
    let csv = format!(
        "t,v,r,draws,smoothed_re,smoothed_im,factored_re,factored_im,disc_factor,error\n{},{},{},{},{},{},{},{},{},{}\n",
        p.t, p.v, p.r, c.draws, c.smoothed.0, c.smoothed.1, c.factored.0, c.factored.1, c.disc_factor, c.error
    );
    let mut files = vec![("char.csv".to_string(), csv)];
    if g.plot_data {
        let mut s = String::from("x,y\n");
        for k in 0..=300 {
            let rho = k as f64 * 0.1;
            s.push_str(&format!("{rho},{}\n", disc_char(rho, 0.0, 1.0)?));
        }
        files.push(("char_plot.csv".into(), s));
    }
    Ok(Outcome { summary: json!({ "check": c }), files })
}
