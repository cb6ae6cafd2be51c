//! `circlaw`: experiment runner for the random-matrix laboratory.
//!
//! Every subcommand resolves its parameters from defaults, an optional TOML
//! file and flags (in increasing precedence), writes CSV/JSON artifacts into
//! the output directory and echoes the resolved configuration.

mod commands;
mod config;

use std::path::Path;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use commands::Outcome;
use config::{ComplexValue, GlobalFlags, Globals};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Validation(String),
    #[error(transparent)]
    Core(#[from] circlaw::Error),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Core(e) if e.is_validation() => 3,
            CliError::Core(_) => 4,
            CliError::Io(_) => 1,
        }
    }

    fn kind(&self) -> &'static str {
        match self.code() {
            2 => "usage",
            3 => "validation",
            4 => "solver",
            _ => "io",
        }
    }
}

#[derive(Parser)]
#[command(name = "circlaw", version, about = "Circular-law experiments: spectra, limit laws, potentials, tails, rates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues and singular values of one shifted random matrix.
    Simulate(SimulateFlags),
    /// Limiting density of the symmetrized singular-value law at a shift.
    Limit(LimitFlags),
    /// Empirical, limiting and disc potentials on a grid of shifts.
    Potential(PotentialFlags),
    /// Smallest-singular-value tails, small-ball probabilities, profiles.
    Svtail(SvTailFlags),
    /// Distance-to-limit sweep across matrix sizes.
    Converge(ConvergeFlags),
    /// Characteristic-function factorization under disc smoothing.
    Char(CharFlags),
}

fn parse_complex(s: &str) -> Result<ComplexValue, String> {
    s.parse()
}

#[derive(Args, Serialize)]
struct SimulateFlags {
    #[command(flatten)]
    #[serde(skip)]
    global: GlobalFlags,
    #[arg(long)]
    n: Option<usize>,
    /// gaussian, rademacher, uniform or two_point(a).
    #[arg(long)]
    dist: Option<String>,
    /// Bernoulli retention probability.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    z: Option<ComplexValue>,
    /// Smoothing radius.
    #[arg(long)]
    r: Option<f64>,
}

#[derive(Args, Serialize)]
struct LimitFlags {
    #[command(flatten)]
    #[serde(skip)]
    global: GlobalFlags,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    z: Option<ComplexValue>,
    /// Number of grid points.
    #[arg(long)]
    grid: Option<usize>,
    /// Grid margin beyond the support edge.
    #[arg(long)]
    margin: Option<f64>,
}

#[derive(Args, Serialize)]
struct PotentialFlags {
    #[command(flatten)]
    #[serde(skip)]
    global: GlobalFlags,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    dist: Option<String>,
    #[arg(long)]
    p: Option<f64>,
    /// Real parts of the grid, comma-separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    re: Option<Vec<f64>>,
    /// Imaginary parts of the grid, comma-separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    im: Option<Vec<f64>>,
    /// Smoothing radius (default n^{-1/8}).
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Drop trials failing the s_n / s_1 gates.
    #[arg(long)]
    truncate: Option<bool>,
    /// Any of empirical, limit, disc.
    #[arg(long, value_delimiter = ',')]
    kinds: Option<Vec<String>>,
}

#[derive(Args, Serialize)]
struct SvTailFlags {
    #[command(flatten)]
    #[serde(skip)]
    global: GlobalFlags,
    /// tail, small-ball or profile.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    dist: Option<String>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    z: Option<ComplexValue>,
    #[arg(long)]
    trials: Option<usize>,
    /// Tail thresholds are gamma / (c n^2).
    #[arg(long, value_delimiter = ',')]
    gammas: Option<Vec<f64>>,
    #[arg(long)]
    c: Option<f64>,
    /// Coefficient vector, comma-separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x: Option<Vec<f64>>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    v: Option<f64>,
    #[arg(long)]
    big_r: Option<f64>,
    #[arg(long)]
    small_r: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
}

#[derive(Args, Serialize)]
struct ConvergeFlags {
    #[command(flatten)]
    #[serde(skip)]
    global: GlobalFlags,
    /// Matrix sizes, ascending.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', value_parser = parse_complex, allow_hyphen_values = true)]
    z: Option<Vec<ComplexValue>>,
    #[arg(long)]
    trials: Option<usize>,
    /// Any of sv-vs-limit, radial, angular, mp.
    #[arg(long, value_delimiter = ',')]
    kinds: Option<Vec<String>>,
    #[arg(long)]
    dist: Option<String>,
}

#[derive(Args, Serialize)]
struct CharFlags {
    #[command(flatten)]
    #[serde(skip)]
    global: GlobalFlags,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    dist: Option<String>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    t: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    v: Option<f64>,
    #[arg(long)]
    draws: Option<usize>,
}

fn execute<P, F>(section: &str, gf: &GlobalFlags, flags: &F, run: fn(&Globals, &P) -> Result<Outcome, CliError>) -> Result<(), CliError>
where
    P: Serialize + serde::de::DeserializeOwned + Default + Sync,
    F: Serialize,
{
    let (globals, params) = config::resolve::<P, F>(section, gf, flags)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(globals.workers)
        .build()
        .map_err(|e| CliError::Io(format!("cannot start worker pool: {e}")))?;
    let outcome = pool.install(|| run(&globals, &params))?;
    emit(section, &globals, &params, outcome)
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    std::fs::write(dir.join(name), contents).map_err(|e| CliError::Io(format!("cannot write {name}: {e}")))
}

fn emit<P: Serialize>(section: &str, globals: &Globals, params: &P, outcome: Outcome) -> Result<(), CliError> {
    let dir = &globals.out;
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let mut echo = toml::Table::try_from(globals).map_err(|e| CliError::Io(e.to_string()))?;
    echo.insert(section.into(), toml::Value::try_from(params).map_err(|e| CliError::Io(e.to_string()))?);
    let config_name = format!("{section}_config.toml");
    write(dir, &config_name, &toml::to_string(&echo).map_err(|e| CliError::Io(e.to_string()))?)?;
    let mut files: Vec<String> = Vec::new();
    for (name, contents) in &outcome.files {
        write(dir, name, contents)?;
        files.push(name.clone());
    }
    let summary_name = format!("{section}.json");
    files.push(summary_name.clone());
    files.push(config_name);
    let doc = json!({
        "command": section,
        "config": { "globals": globals, section: params },
        "results": outcome.summary,
        "files": files,
    });
    let pretty = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Io(e.to_string()))?;
    write(dir, &summary_name, &(pretty + "\n"))?;
    if globals.json {
        println!("{doc}");
    } else {
        println!("config {}", doc["config"]);
        println!("results {}", doc["results"]);
        for f in doc["files"].as_array().into_iter().flatten() {
            println!("wrote {}", dir.join(f.as_str().unwrap_or_default()).display());
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Simulate(f) => execute("simulate", &f.global, f, commands::simulate),
        Command::Limit(f) => execute("limit", &f.global, f, commands::limit),
        Command::Potential(f) => execute("potential", &f.global, f, commands::potential),
        Command::Svtail(f) => execute("svtail", &f.global, f, commands::svtail),
        Command::Converge(f) => execute("converge", &f.global, f, commands::converge),
        Command::Char(f) => execute("char", &f.global, f, commands::char_check),
    }
}

fn report(e: &CliError) {
    let line = json!({ "error": e.kind(), "code": e.code(), "message": e.to_string() });
    eprintln!("{line}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let msg = e.to_string();
            let first = msg.lines().find(|l| !l.trim().is_empty()).unwrap_or("invalid arguments");
            let err = CliError::Usage(first.trim_start_matches("error: ").to_string());
            report(&err);
            return ExitCode::from(err.code());
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(&e);
            ExitCode::from(e.code())
        }
    }
}
