//! Run configuration: defaults, overlaid by a TOML file, overlaid by flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{Map, Value};

use crate::CliError;

/// Keys accepted at the top level of a config file besides the
/// per-subcommand tables.
const GLOBAL_KEYS: [&str; 5] = ["seed", "workers", "out", "json", "plot_data"];
pub const SECTIONS: [&str; 6] = ["simulate", "limit", "potential", "svtail", "converge", "char"];

/// A complex number written as `a`, `a+bi`, `a-bi` or `bi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexValue(pub f64, pub f64);

impl fmt::Display for ComplexValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.1 == 0.0 {
            write!(f, "{}", self.0)
        } else {
            write!(f, "{}{:+}i", self.0, self.1)
        }
    }
}

impl FromStr for ComplexValue {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || format!("cannot parse complex number {s:?}");
        if t.is_empty() {
            return Err(bad());
        }
        let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
            return t.parse::<f64>().map(|re| ComplexValue(re, 0.0)).map_err(|_| bad());
        };
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
        let parse_im = |x: &str| match x {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            v => v.parse::<f64>().map_err(|_| bad()),
        };
        match split {
            Some(k) => Ok(ComplexValue(body[..k].parse().map_err(|_| bad())?, parse_im(&body[k..])?)),
            None => Ok(ComplexValue(0.0, parse_im(body)?)),
        }
    }
}

impl Serialize for ComplexValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ComplexValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Pair([f64; 2]),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(re) => Ok(ComplexValue(re, 0.0)),
            Raw::Pair([re, im]) => Ok(ComplexValue(re, im)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Settings shared by every subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Globals {
    pub seed: u64,
    /// Worker threads; 0 lets the runtime decide.
    pub workers: usize,
    pub out: PathBuf,
    pub json: bool,
    pub plot_data: bool,
}

impl Default for Globals {
    fn default() -> Self {
        Globals { seed: 0, workers: 0, out: PathBuf::from("circlaw-out"), json: false, plot_data: false }
    }
}

/// Global flags as given on the command line.
#[derive(Debug, Clone, Default, clap::Args, Serialize)]
pub struct GlobalFlags {
    /// Master seed for every random stream.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Print the summary as JSON on stdout.
    #[arg(long)]
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub json: bool,
    /// TOML config file; flags override its values.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Worker threads (results do not depend on this).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Also write plot-ready data files.
    #[arg(long)]
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub plot_data: bool,
}

fn to_object(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => Map::new(),
    }
}

fn overlay(base: &mut Map<String, Value>, top: Map<String, Value>, origin: &str) -> Result<(), CliError> {
    // unset flags serialize as null
    for (k, v) in top.into_iter().filter(|(_, v)| !v.is_null()) {
        if !base.contains_key(&k) {
            return Err(CliError::Usage(format!("unknown key {k:?} in {origin}")));
        }
        base.insert(k, v);
    }
    Ok(())
}

fn read_file(path: &Path) -> Result<Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let table: toml::Table =
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {}", path.display(), e.message())))?;
    let value = serde_json::to_value(table).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(to_object(value))
}

fn finish<P: DeserializeOwned>(merged: Map<String, Value>, what: &str) -> Result<P, CliError> {
    serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::Usage(format!("{what}: {e}")))
}

/// Resolves the globals and the `section` parameters.
pub fn resolve<P, F>(section: &str, global_flags: &GlobalFlags, flags: &F) -> Result<(Globals, P), CliError>
where
    P: Serialize + DeserializeOwned + Default,
    F: Serialize,
{
    let file = match &global_flags.config {
        Some(path) => read_file(path)?,
        None => Map::new(),
    };
    let mut globals = to_object(serde_json::to_value(Globals::default()).expect("serializable"));
    let mut params = to_object(serde_json::to_value(P::default()).expect("serializable"));
    let mut file_globals = Map::new();
    let mut file_section = Map::new();
    for (k, v) in file {
        if k == section {
            file_section = match v {
                Value::Object(m) => m,
                _ => return Err(CliError::Usage(format!("[{section}] must be a table"))),
            };
        } else if GLOBAL_KEYS.contains(&k.as_str()) {
            file_globals.insert(k, v);
        } else if !SECTIONS.contains(&k.as_str()) {
            return Err(CliError::Usage(format!("unknown key {k:?} in config file")));
        }
    }
    overlay(&mut globals, file_globals, "config file")?;
    overlay(&mut params, file_section, &format!("config section [{section}]"))?;
    overlay(&mut globals, to_object(serde_json::to_value(global_flags).expect("serializable")), "flags")?;
    overlay(&mut params, to_object(serde_json::to_value(flags).expect("serializable")), "flags")?;
    Ok((finish(globals, "global settings")?, finish(params, section)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_round_trip() {
        for (s, want) in [
            ("0.5", ComplexValue(0.5, 0.0)),
            ("0.5+0.1i", ComplexValue(0.5, 0.1)),
            ("-1-2i", ComplexValue(-1.0, -2.0)),
            ("2i", ComplexValue(0.0, 2.0)),
            ("-i", ComplexValue(0.0, -1.0)),
            ("1e-3-2e-3i", ComplexValue(1e-3, -2e-3)),
            (" 1 + 1j ", ComplexValue(1.0, 1.0)),
        ] {
            let z: ComplexValue = s.parse().unwrap();
            assert_eq!(z, want, "{s}");
            assert_eq!(z.to_string().parse::<ComplexValue>().unwrap(), z);
        }
        assert!("abc".parse::<ComplexValue>().is_err());
        assert!("1+".parse::<ComplexValue>().is_err());
    }

    #[derive(Debug, Serialize, Deserialize, PartialEq)]
    #[serde(deny_unknown_fields, default)]
    struct Demo {
        n: usize,
        z: ComplexValue,
    }

    impl Default for Demo {
        fn default() -> Self {
            Demo { n: 4, z: ComplexValue(0.0, 0.0) }
        }
    }

    #[derive(Serialize, Default)]
    struct DemoFlags {
        #[serde(skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
    }

    #[test]
    fn precedence() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "seed = 9\n[demo]\nn = 7\nz = \"0.5+1i\"\n").unwrap();
        let gf = GlobalFlags { config: Some(path.clone()), ..Default::default() };
        let (g, p): (Globals, Demo) = resolve("demo", &gf, &DemoFlags::default()).unwrap();
        assert_eq!(g.seed, 9);
        assert_eq!(p, Demo { n: 7, z: ComplexValue(0.5, 1.0) });
        let gf = GlobalFlags { seed: Some(3), config: Some(path), ..Default::default() };
        let (g, p): (Globals, Demo) = resolve("demo", &gf, &DemoFlags { n: Some(11) }).unwrap();
        assert_eq!((g.seed, p.n), (3, 11));
        let (g, p): (Globals, Demo) = resolve("demo", &GlobalFlags::default(), &DemoFlags::default()).unwrap();
        assert_eq!((g, p), (Globals::default(), Demo::default()));
    }

    #[test]
    fn unknown_keys_are_usage_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "[demo]\nbogus = 1\n").unwrap();
        let gf = GlobalFlags { config: Some(path), ..Default::default() };
        let r: Result<(Globals, Demo), _> = resolve("demo", &gf, &DemoFlags::default());
        assert!(matches!(r, Err(CliError::Usage(_))));
    }
}
