//! Command-line driver: runs experiments, writes CSV tables with JSON
//! sidecars, and runs the verification suites.

pub mod config;
pub mod error;
pub mod experiments;
pub mod report;
pub mod verify;

use std::io::Write;
use std::path::Path;

use clap::{Parser, Subcommand};

use crate::config::{Format, Level, Settings};
use crate::error::{CliError, CliResult};
use crate::experiments::Artifact;

#[derive(Debug, Parser)]
#[command(name = "designlab", version, about = "Random circuit design experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub settings: Settings,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Monte Carlo expected collision probability against depth.
    CollMc,
    /// Exact expected collision from the Pauli-string chain.
    CollChain,
    /// Upper and lower collision bounds next to the exact value.
    CollBound,
    /// Box-norm mixing curve and the eigenvalue spectrum of Q.
    SpectralMix,
    /// Row/column subspace gap for a 2D layout.
    #[command(name = "gap-2d")]
    Gap2d,
    /// Fraction of circuits with a large all-zeros output probability.
    Anticonc,
    /// Expected hitting times of the weight chain.
    Hitting,
    /// Poissonized decoupled chain against its binomial mixture law.
    Waittime,
    /// Reduced-state distance to maximally mixed.
    Scramble,
    /// Exact permutation and Weingarten checks.
    PermChecks,
    /// Run the verification suite.
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::CollMc => "coll-mc",
            Command::CollChain => "coll-chain",
            Command::CollBound => "coll-bound",
            Command::SpectralMix => "spectral-mix",
            Command::Gap2d => "gap-2d",
            Command::Anticonc => "anticonc",
            Command::Hitting => "hitting",
            Command::Waittime => "waittime",
            Command::Scramble => "scramble",
            Command::PermChecks => "perm-checks",
            Command::Verify => "verify",
        }
    }
}

pub fn run_experiment(command: Command, settings: Settings) -> CliResult<Artifact> {
    match command {
        Command::CollMc => experiments::coll_mc(settings),
        Command::CollChain => experiments::coll_chain(settings),
        Command::CollBound => experiments::coll_bound(settings),
        Command::SpectralMix => experiments::spectral_mix(settings),
        Command::Gap2d => experiments::gap_2d(settings),
        Command::Anticonc => experiments::anticonc(settings),
        Command::Hitting => experiments::hitting(settings),
        Command::Waittime => experiments::waittime(settings),
        Command::Scramble => experiments::scramble(settings),
        Command::PermChecks => experiments::perm_checks(settings),
        Command::Verify => Err(CliError::Usage("verify is not an experiment".into())),
    }
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

/// Writes every table and the sidecar into `dir`, returning the paths.
pub fn write_artifact(artifact: &Artifact, dir: &Path) -> CliResult<Vec<String>> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.display().to_string(), source })?;
    let mut written = Vec::new();
    for t in &artifact.tables {
        let p = dir.join(format!("{}.csv", t.name));
        write_file(&p, &t.to_csv())?;
        written.push(p.display().to_string());
    }
    let stem = artifact.tables.first().map_or(artifact.experiment.replace('-', "_"), |t| t.name.clone());
    let p = dir.join(format!("{stem}.json"));
    write_file(&p, &(serde_json::to_string_pretty(&artifact.sidecar())? + "\n"))?;
    written.push(p.display().to_string());
    Ok(written)
}

fn init_threads(settings: &Settings) -> CliResult<()> {
    if let Some(k) = settings.threads()? {
        if k == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        // a pool may already exist when called twice in one process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
    Ok(())
}

/// Runs a parsed command line; returns the process exit code.
pub fn run(cli: Cli) -> CliResult<i32> {
    let settings = cli.settings.resolve()?;
    init_threads(&settings)?;
    let format = settings.format.unwrap_or(Format::Csv);
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let io = |source| CliError::Io { path: "<stdout>".into(), source };

    if cli.command == Command::Verify {
        let level = settings.level.unwrap_or(Level::Fast);
        let report = verify::verify_suite(level);
        let text = serde_json::to_string_pretty(&report)? + "\n";
        if let Some(dir) = &settings.out {
            std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.display().to_string(), source })?;
            write_file(&dir.join("verify.json"), &text)?;
        }
        out.write_all(text.as_bytes()).map_err(io)?;
        eprintln!("{} checks, {} failed", report.checks.len(), report.failures());
        return Ok(if report.all_pass() { 0 } else { 1 });
    }

    let artifact = run_experiment(cli.command, settings.clone())?;
    if let Some(seed) = artifact.seed {
        eprintln!("seed: {seed}");
    }
    match &settings.out {
        Some(dir) => {
            for p in write_artifact(&artifact, dir)? {
                writeln!(out, "{p}").map_err(io)?;
            }
        }
        None => {
            let text = match format {
                Format::Csv => artifact.tables.first().map(|t| t.to_csv()).unwrap_or_default(),
                Format::Json => serde_json::to_string_pretty(&artifact.sidecar())? + "\n",
            };
            out.write_all(text.as_bytes()).map_err(io)?;
        }
    }
    Ok(0)
}
