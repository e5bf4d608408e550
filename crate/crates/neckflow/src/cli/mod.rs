//! Batch front-end: subcommands `neck`, `glue`, `graph`, `ode`, `project`, `norms`
//! and `report`, flat JSON configuration files overridden by flags, and JSON/CSV
//! artifacts written to an output directory.

mod commands;
mod config;

use crate::error::{Error, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::ffi::OsString;
use std::path::PathBuf;

pub use config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "neckflow", version, about = "Lawlor necks, glued tori and the neck-size balancing law")]
pub struct Cli {
    /// Flat JSON file of parameters; flags override its keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for every random choice of the run.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Angles, A and c_+ of a Lawlor neck, with round-trip and scaling checks.
    Neck(NeckArgs),
    /// Meshes of the glued desingularization over a sweep of eps.
    Glue(GlueArgs),
    /// Matching constants C_b of a graph of components and intersection points.
    Graph(GraphArgs),
    /// The neck schedule eps(t), its numerical integration and the validator.
    Ode(OdeArgs),
    /// Projections of the zeroth-order field onto the approximate kernel.
    Project(ProjectArgs),
    /// Weighted norms of the Lagrangian angle along a schedule.
    Norms(NormsArgs),
    /// Aggregates the reports found in the subdirectories of a root directory.
    Report(ReportArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Neck(_) => "neck",
            Command::Glue(_) => "glue",
            Command::Graph(_) => "graph",
            Command::Ode(_) => "ode",
            Command::Project(_) => "project",
            Command::Norms(_) => "norms",
            Command::Report(_) => "report",
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct NeckArgs {
    /// Dimension.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// Lawlor parameters a_1,...,a_m.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<f64>>,
    /// Target angles phi_1,...,phi_m (with --A) for the inverse map.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<Vec<f64>>,
    /// Target constant A for the inverse map.
    #[arg(long = "A", id = "A")]
    #[serde(rename = "A", skip_serializing_if = "Option::is_none")]
    pub area: Option<f64>,
    /// Random instances of the scaling checks.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instances: Option<usize>,
}

/// Neck, gluing and lattice parameters shared by the mesh-based commands.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct GeometryArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<f64>>,
    /// Side length of the first torus.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub side1: Option<f64>,
    /// Side length of the second torus.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub side2: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r1: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r2: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hbar: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    /// `default` or `coarse`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolution: Option<String>,
    /// Overrides the sphere rule level of the resolution.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sphere_level: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct GlueArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub geometry: GeometryArgs,
    /// Neck scales of the sweep.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<Vec<f64>>,
    /// Write mesh.jsonl for the first scale.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mesh: Option<bool>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct GraphArgs {
    /// JSON file {vertices: [{id, volume}], edges: [{id, tail, head, c}]}.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    /// Torus case volumes and neck constant, used when no file is given.
    #[arg(long = "V1", id = "V1")]
    #[serde(rename = "V1", skip_serializing_if = "Option::is_none")]
    pub v1: Option<f64>,
    #[arg(long = "V2", id = "V2")]
    #[serde(rename = "V2", skip_serializing_if = "Option::is_none")]
    pub v2: Option<f64>,
    #[arg(long = "c", id = "c")]
    #[serde(rename = "c", skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    /// Rate d(eps_j^2)/dt applied to every edge.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    /// One rate per edge.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rates: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct OdeArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// ODE coefficient; computed from A, c_plus, V1, V2 when absent.
    #[arg(long = "c", id = "c")]
    #[serde(rename = "c", skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[arg(long = "A", id = "A")]
    #[serde(rename = "A", skip_serializing_if = "Option::is_none")]
    pub area: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_plus: Option<f64>,
    #[arg(long = "V1", id = "V1")]
    #[serde(rename = "V1", skip_serializing_if = "Option::is_none")]
    pub v1: Option<f64>,
    #[arg(long = "V2", id = "V2")]
    #[serde(rename = "V2", skip_serializing_if = "Option::is_none")]
    pub v2: Option<f64>,
    /// Start time; derived from eps0 when absent.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Value of the unperturbed schedule at t = Lambda.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps0: Option<f64>,
    /// Constant perturbation h.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    /// Sample times and values of h (monotone cubic interpolation).
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_times: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_values: Option<Vec<f64>>,
    /// Horizon as a multiple of Lambda.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    /// Number of path samples.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Hoelder exponent of the validator.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Tolerance of the numerical integration.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct ProjectArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub geometry: GeometryArgs,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<Vec<f64>>,
    /// Freeze eps (d eps / dt = 0) instead of following the closed-form schedule.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frozen: Option<bool>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct NormsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub geometry: GeometryArgs,
    /// Schedule value at the first slice.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps0: Option<f64>,
    /// Number of slices at Lambda, 2 Lambda, 4 Lambda, ...
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slices: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zeta: Option<f64>,
    /// Exponent tau of the norm constants (defaults to 1/(2(m + 2))).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm_tau: Option<f64>,
    /// Shift of nu applied to the field (2 for the Lagrangian angle).
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu_shift: Option<f64>,
    /// Random pair budget of the Hoelder seminorms.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct ReportArgs {
    /// Directory whose subdirectories hold earlier run outputs.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub root: Option<PathBuf>,
}

/// Parses the arguments, runs the command and returns the process exit status.
/// Failures print a JSON error object to standard output.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            print_error("config", &e.to_string(), 2);
            return 2;
        }
    };
    match run_cli(cli) {
        Ok(()) => 0,
        Err(e) => {
            let code = e.exit_code();
            print_error(e.kind(), &e.to_string(), code);
            code
        }
    }
}

fn print_error(kind: &str, message: &str, code: i32) {
    let v = json!({"error": {"kind": kind, "message": message.trim(), "exit_code": code}});
    print!("{}", crate::io::to_json_pretty(&v).unwrap_or_else(|_| format!("{v}\n")));
}

/// Merges configuration and flags and executes the command.
pub fn run_cli(cli: Cli) -> Result<()> {
    let cfg = RunConfig::resolve(&cli)?;
    std::fs::create_dir_all(&cfg.output_dir)
        .map_err(|e| Error::Config(format!("cannot create output directory {}: {e}", cfg.output_dir.display())))?;
    commands::run(&cli.command, &cfg)
}
