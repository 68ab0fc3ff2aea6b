//! `hjlab`: Hopf–Lax diagnostics and functional-inequality constants on
//! finite measured spaces.
//!
//! Exit status: 0 when every check passes (or the chain is consistent),
//! 1 when a check fails or the chain has a counterexample, 2 on usage,
//! configuration or I/O errors. Every invocation writes `run.json` to the
//! output directory.

mod commands;
mod output;
mod plot;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use output::{Manifest, OutDir, Versions};

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 7;

#[derive(Debug, Parser, Serialize)]
#[command(name = "hjlab", version, about = "Hopf–Lax semigroup and functional inequalities on measured graphs")]
struct Cli {
    /// Directory for artifacts and the run manifest.
    #[arg(long, global = true, env = "HJLAB_OUT", default_value = "hjlab-out")]
    out_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    /// Write a generated space to a JSON space file.
    Gen(GenArgs),
    /// Trace Q_t f over a time grid and check its exact invariants.
    Semigroup(SemigroupArgs),
    /// Estimate LSI, Talagrand and Poincaré constants with witnesses.
    Constants(ConstantsArgs),
    /// Check LSI(K) => T(K) => P(K) witness by witness.
    Chain(ChainArgs),
    /// Exact W_2 between two measures.
    Transport(TransportArgs),
    /// Metric validation, doubling and local Poincaré certificates.
    Doubling(DoublingArgs),
    /// Extract plot-ready CSV from a report.
    Plot(PlotArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Gen(_) => "gen",
            Command::Semigroup(_) => "semigroup",
            Command::Constants(_) => "constants",
            Command::Chain(_) => "chain",
            Command::Transport(_) => "transport",
            Command::Doubling(_) => "doubling",
            Command::Plot(_) => "plot",
        }
    }

    fn seed(&self) -> Option<u64> {
        match self {
            Command::Constants(a) => Some(a.seed),
            Command::Chain(a) => Some(a.seed),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Circle,
    Gauss,
    Torus,
    Path,
    Complete,
}

#[derive(Debug, Args, Serialize)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    /// Points (per side for a torus).
    #[arg(long)]
    pub n: usize,
    /// Second torus side; defaults to `n`.
    #[arg(long)]
    pub m: Option<usize>,
    /// Circumference of a circle, or torus width. Defaults to 2π.
    #[arg(long)]
    pub length: Option<f64>,
    /// Torus height; defaults to the width.
    #[arg(long)]
    pub height: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Gaussian interval is [-W, W].
    #[arg(long, default_value_t = 4.0)]
    pub half_width: f64,
    /// Space file to write; a bare name goes into the output directory.
    #[arg(long, default_value = "space.json")]
    pub out: String,
}

#[derive(Debug, Args, Serialize)]
pub struct SemigroupArgs {
    /// Generator spec (`circle:N[:L]`, `gauss:N:SIGMA:W`, `torus:N:M[:W:H]`,
    /// `path:N`, `complete:N`) or a space file.
    #[arg(long)]
    pub space: String,
    #[arg(long, default_value = "cos")]
    pub field: String,
    /// `geo:MIN:MAX:COUNT`, `lin:MIN:MAX:COUNT` or `t1,t2,...`.
    #[arg(long, default_value = "geo:0.001:1:16")]
    pub times: String,
    /// Forward step of the HJ residual as a fraction of t.
    #[arg(long, default_value_t = 1.0 / 16.0, conflicts_with = "step")]
    pub step_fraction: f64,
    /// Fixed forward step of the HJ residual.
    #[arg(long)]
    pub step: Option<f64>,
    /// Time used by the residual and mesh sweeps.
    #[arg(long, default_value_t = 0.5)]
    pub at: f64,
    /// Forward steps for a residual-versus-s sweep at `--at`.
    #[arg(long, value_delimiter = ',')]
    pub residual_steps: Vec<f64>,
    /// Semigroup defect at t = s = `--at` on this many successive refinements.
    #[arg(long, default_value_t = 0)]
    pub refine: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct FamilyArgs {
    /// Laplacian eigenfields per family.
    #[arg(long, default_value_t = 4)]
    pub eigen: usize,
    /// Smoothed random fields per family.
    #[arg(long, default_value_t = 4)]
    pub random: usize,
    /// Tilt slopes along the line coordinate.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-1,-0.5,-0.25,0.25,0.5,1")]
    pub tilts: Vec<f64>,
    /// Amplitude of the near-constant witnesses; 0 disables them.
    #[arg(long, default_value_t = 0.1)]
    pub near_constant: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct ConstantsArgs {
    #[arg(long)]
    pub space: String,
    /// Inequalities to estimate.
    #[arg(long, value_delimiter = ',', default_value = "lsi,talagrand,poincare")]
    pub which: Vec<String>,
    /// Coordinate-descent sweeps per witness.
    #[arg(long, default_value_t = hjlab::inequalities::DEFAULT_BUDGET)]
    pub budget: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[command(flatten)]
    pub family: FamilyArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct ChainArgs {
    #[arg(long)]
    pub space: String,
    /// Hypothesized LSI constant.
    #[arg(long = "K", visible_alias = "k")]
    pub k: f64,
    /// Relative tolerance lost per implication.
    #[arg(long, default_value_t = 0.05)]
    pub tau: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Seeded random fields for the ψ and φ traces.
    #[arg(long, default_value_t = 20)]
    pub traces: usize,
    /// Extra trace fields (same syntax as `semigroup --field`).
    #[arg(long)]
    pub trace_field: Vec<String>,
    #[arg(long, default_value = "geo:0.01:2:16")]
    pub psi_times: String,
    #[arg(long, default_value = "geo:0.01:1:16")]
    pub phi_times: String,
    #[command(flatten)]
    pub family: FamilyArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct TransportArgs {
    #[arg(long)]
    pub space: String,
    /// `nu`, `uniform`, `point:I`, `density:FIELD` (F^2 ν) or `csv:PATH`.
    #[arg(long)]
    pub mu0: String,
    #[arg(long)]
    pub mu1: String,
}

#[derive(Debug, Args, Serialize)]
pub struct DoublingArgs {
    #[arg(long)]
    pub space: String,
    /// Smallest radius; defaults to the mesh size.
    #[arg(long)]
    pub r_min: Option<f64>,
    /// Largest radius; defaults to half the diameter.
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long, default_value_t = 8)]
    pub r_steps: usize,
    /// Field for a local Poincaré certificate.
    #[arg(long)]
    pub field: Option<String>,
    #[arg(long, requires = "field")]
    pub radius: Option<f64>,
    #[arg(long, default_value_t = 2.0)]
    pub dilation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum PlotKind {
    Psi,
    Phi,
    ResidualVsS,
    DefectVsMesh,
}

#[derive(Debug, Args, Serialize)]
pub struct PlotArgs {
    #[arg(long, value_enum)]
    pub kind: PlotKind,
    /// `report.json` (psi, phi) or `trace.json` (residual_vs_s, defect_vs_mesh).
    #[arg(long)]
    pub input: PathBuf,
    /// CSV to write; defaults to `KIND.csv` in the output directory.
    #[arg(long)]
    pub out: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let mut out = match OutDir::create(&cli.out_dir) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };

    let (code, summary) = match commands::run(&cli.command, &mut out) {
        Ok(outcome) => {
            println!("{}", outcome.message);
            (if outcome.pass { 0 } else { 1 }, outcome.summary)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            (2, serde_json::json!({ "error": format!("{e:#}") }))
        }
    };

    let manifest = Manifest {
        command: cli.command.name(),
        argv: std::env::args().collect(),
        config: serde_json::to_value(&cli).unwrap_or(serde_json::Value::Null),
        seed: cli.command.seed(),
        versions: Versions::current(),
        wall_time_s: start.elapsed().as_secs_f64(),
        exit_code: code,
        summary,
        artifacts: out.written().to_vec(),
    };
    if let Err(e) = out.write_json("run.json", &manifest) {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    ExitCode::from(code as u8)
}
