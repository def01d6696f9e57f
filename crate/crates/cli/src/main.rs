//! `illum`: command-line front end for illumination witnesses, Euclidean
//! direction sets, Koebe realizations and their certificates.
//!
//! Exit codes: 0 when every emitted certificate passes, 1 on a certificate
//! failure, 2 on parse or I/O errors, 3 on invalid input.

mod commands;
mod input;
mod output;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use illumination_core::Tolerances;

use output::exit_code;

#[derive(Debug, Parser)]
#[command(name = "illum", version, about = "Illumination witnesses and certificates for convex polytopes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Args)]
struct Flags {
    /// Tolerance override, `KEY=VALUE` with KEY one of unit, pred, dedup; a
    /// bare number sets pred. Repeatable.
    #[arg(long = "tol", global = true, value_name = "KEY=VALUE")]
    tol: Vec<String>,
    /// Seed for every randomized choice; recorded in all artifacts.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Also search a greatsphere grid of this many candidate lights for the
    /// smallest cover (witness).
    #[arg(long, global = true, value_name = "N")]
    grid: Option<usize>,
    /// Write artifacts into this directory instead of printing the primary
    /// one to stdout.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Verify every proper face, not only the vertices.
    #[arg(long, global = true)]
    strict: bool,
    /// Also emit SVG renders next to the artifacts.
    #[arg(long, global = true)]
    render: bool,
}

#[derive(Clone, Debug, Subcommand)]
pub enum Command {
    /// Print the f-vector and face lattice of a spolytope.json or OFF polytope.
    Faces { input: PathBuf },
    /// Write the polar of a spherical polytope as canonical spolytope.json.
    Polar { input: PathBuf },
    /// Construct and verify d + 1 lights on a greatsphere.
    Witness { input: PathBuf },
    /// Re-verify a witness (spherical input) or direction set (OFF input).
    Verify { input: PathBuf, witness: PathBuf },
    /// Illuminate a combinatorially equivalent copy of an OFF polytope with
    /// d + 1 directions.
    Bridge { input: PathBuf },
    /// Koebe realization of a polyhedral graph (graph JSON or OFF) with four
    /// illuminating directions.
    Koebe { input: PathBuf },
    /// Render a spherical polygon, circle pattern or planar polygon as SVG;
    /// spherical 3-polytopes are written as a gnomonic OFF mesh.
    Render {
        input: PathBuf,
        /// Witness, certificate or direction file to overlay.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
}

/// Everything a run depends on.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    /// Explicit tolerances; `None` keeps the file's or the defaults.
    pub tol: Option<Tolerances>,
    pub seed: u64,
    pub grid: Option<usize>,
    pub out: Option<PathBuf>,
    pub strict: bool,
    pub render: bool,
}

impl RunConfig {
    fn from_cli(cli: Cli) -> anyhow::Result<Self> {
        let f = cli.flags;
        Ok(Self {
            command: cli.command,
            tol: parse_tolerances(&f.tol)?,
            seed: f.seed,
            grid: f.grid,
            out: f.out,
            strict: f.strict,
            render: f.render,
        })
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tol.unwrap_or_default()
    }
}

fn parse_tolerances(entries: &[String]) -> anyhow::Result<Option<Tolerances>> {
    if entries.is_empty() {
        return Ok(None);
    }
    let mut tol = Tolerances::default();
    for entry in entries {
        let (key, value) = entry.split_once('=').unwrap_or(("pred", entry));
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| output::invalid(format!("--tol {entry:?}: {value:?} is not a number")))?;
        match key.trim() {
            "unit" => tol.unit = value,
            "pred" => tol.pred = value,
            "dedup" => tol.dedup = value,
            other => return Err(output::invalid(format!("--tol: unknown tolerance {other:?}"))),
        }
    }
    tol.validate()?;
    Ok(Some(tol))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = RunConfig::from_cli(cli).and_then(|cfg| {
        let report = commands::run(&cfg)?;
        output::emit(&cfg, &report)?;
        Ok(report)
    });
    match result {
        Ok(report) if report.passed => ExitCode::SUCCESS,
        Ok(report) => {
            eprintln!("illum: {}", report.summary);
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("illum: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
