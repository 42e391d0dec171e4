//! Experiment configuration: a flat `key = value` file whose keys mirror
//! the command-line flags. Flags given on the command line win.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use serde::Serialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Fast,
    Full,
}

/// Flags shared by every subcommand. All optional so that a config file
/// can supply them.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize)]
pub struct Settings {
    /// Number of qubits or chain size.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Local dimension.
    #[arg(long, global = true)]
    pub d: Option<u32>,
    /// Number of lines in the 2D gap computation.
    #[arg(long, global = true)]
    pub m: Option<usize>,
    /// Moment order or chain time, depending on the experiment.
    #[arg(long, global = true)]
    pub t: Option<usize>,
    /// Circuit depth parameter.
    #[arg(long, global = true)]
    pub s: Option<usize>,
    /// Depth constant (repetitions for 2D lattices, prefactor for bounds).
    #[arg(long, global = true)]
    pub c: Option<f64>,
    /// Subsystem size for scrambling.
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Initial weight for wait-time experiments.
    #[arg(long, global = true)]
    pub z: Option<usize>,
    /// Poisson intensity for wait-time experiments.
    #[arg(long, global = true)]
    pub tau: Option<f64>,
    /// Anti-concentration threshold, in units of 2^-n.
    #[arg(long, global = true)]
    pub theta: Option<f64>,
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (falls back to DESIGNLAB_THREADS, then all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory; without it the main artifact goes to stdout.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Circuit ensemble: cg, 1d, 2d or haar.
    #[arg(long, global = true)]
    pub ensemble: Option<String>,
    /// Verification level.
    #[arg(long, global = true, value_enum)]
    pub level: Option<Level>,
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

fn parse<T: FromStr>(key: &str, value: &str) -> CliResult<T> {
    value.parse().map_err(|_| CliError::Config(format!("bad value {value:?} for key {key}")))
}

fn parse_enum<T: ValueEnum>(key: &str, value: &str) -> CliResult<T> {
    T::from_str(value, true).map_err(|_| CliError::Config(format!("bad value {value:?} for key {key}")))
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> CliResult<Settings> {
    let mut seen = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", no + 1)))?;
        let key = key.trim().trim_start_matches("--").replace('-', "_");
        if seen.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(CliError::Config(format!("duplicate key {key}")));
        }
    }
    let mut s = Settings::default();
    for (key, v) in &seen {
        let k = key.as_str();
        match k {
            "n" => s.n = Some(parse(k, v)?),
            "d" => s.d = Some(parse(k, v)?),
            "m" => s.m = Some(parse(k, v)?),
            "t" => s.t = Some(parse(k, v)?),
            "s" => s.s = Some(parse(k, v)?),
            "c" => s.c = Some(parse(k, v)?),
            "k" => s.k = Some(parse(k, v)?),
            "z" => s.z = Some(parse(k, v)?),
            "tau" => s.tau = Some(parse(k, v)?),
            "theta" => s.theta = Some(parse(k, v)?),
            "trials" => s.trials = Some(parse(k, v)?),
            "seed" => s.seed = Some(parse(k, v)?),
            "threads" => s.threads = Some(parse(k, v)?),
            "out" => s.out = Some(PathBuf::from(v)),
            "format" => s.format = Some(parse_enum(k, v)?),
            "ensemble" => s.ensemble = Some(v.clone()),
            "level" => s.level = Some(parse_enum(k, v)?),
            other => return Err(CliError::Config(format!("unknown key {other}"))),
        }
    }
    Ok(s)
}

pub fn load_config(path: &Path) -> CliResult<Settings> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    parse_config(&text)
}

impl Settings {
    /// Fills every unset field from `base`.
    pub fn or(self, base: Settings) -> Settings {
        Settings {
            n: self.n.or(base.n),
            d: self.d.or(base.d),
            m: self.m.or(base.m),
            t: self.t.or(base.t),
            s: self.s.or(base.s),
            c: self.c.or(base.c),
            k: self.k.or(base.k),
            z: self.z.or(base.z),
            tau: self.tau.or(base.tau),
            theta: self.theta.or(base.theta),
            trials: self.trials.or(base.trials),
            seed: self.seed.or(base.seed),
            threads: self.threads.or(base.threads),
            out: self.out.or(base.out),
            format: self.format.or(base.format),
            ensemble: self.ensemble.or(base.ensemble),
            level: self.level.or(base.level),
            config: self.config.or(base.config),
        }
    }

    /// Command-line values layered over the config file, if any.
    pub fn resolve(self) -> CliResult<Settings> {
        match self.config.clone() {
            Some(path) => Ok(self.or(load_config(&path)?)),
            None => Ok(self),
        }
    }

    pub fn threads(&self) -> CliResult<Option<usize>> {
        if let Some(t) = self.threads {
            return Ok(Some(t));
        }
        match std::env::var("DESIGNLAB_THREADS") {
            Ok(v) if !v.trim().is_empty() => Ok(Some(parse("DESIGNLAB_THREADS", v.trim())?)),
            _ => Ok(None),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_file() {
        let s = parse_config("# sweep\nn = 4\n--trials=100\nensemble = cg # inline\nformat = JSON\n").unwrap();
        assert_eq!(s.n, Some(4));
        assert_eq!(s.trials, Some(100));
        assert_eq!(s.ensemble.as_deref(), Some("cg"));
        assert_eq!(s.format, Some(Format::Json));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_config("n 4").is_err());
        assert!(parse_config("n = four").is_err());
        assert!(parse_config("depth = 3").is_err());
        assert!(parse_config("n = 1\nn = 2").is_err());
    }

    #[test]
    fn flags_override_file() {
        let cli = Settings { n: Some(6), ..Default::default() };
        let file = parse_config("n = 4\ns = 9").unwrap();
        let merged = cli.or(file);
        assert_eq!(merged.n, Some(6));
        assert_eq!(merged.s, Some(9));
    }
}
