use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "catafind", version, about = "Locate catastrophes underlying bifurcations of polynomial vector fields")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Multistart search for points where F and B_1..B_r vanish.
    Find(FindArgs),
    /// Evaluate every B, G and the subrank at one point.
    Check(CheckArgs),
    /// Count steady states over a grid in a parameter plane.
    Scan(ScanArgs),
    /// Number of minors in the Boardman construction.
    CountMinors(CountArgs),
    /// Boardman symbol at a point.
    Boardman(BoardmanArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// Field definition file.
    #[arg(long)]
    pub field: Option<PathBuf>,
    /// `rd` or `primary:n=..,r=..[,lambda=l2:l3..][,tau=t2:t3..]`.
    #[arg(long)]
    pub builtin: Option<String>,
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    #[command(flatten)]
    pub source: Source,
    /// Freeze parameters, `name=value,...`.
    #[arg(long, value_delimiter = ',')]
    pub fix: Vec<String>,
}

#[derive(Debug, Args)]
pub struct TolArgs {
    #[arg(long, default_value_t = 1e-8)]
    pub tol_b: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tol_g: f64,
}

#[derive(Debug, Args)]
pub struct FindArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[arg(long)]
    pub codim: usize,
    /// Unfolding parameters, moved to the front in this order.
    #[arg(long, value_delimiter = ',')]
    pub unfold: Vec<String>,
    /// Seed box over variables then free parameters, `lo:hi,...`; a single
    /// interval applies to every unknown.
    #[arg(long = "box", value_delimiter = ',', allow_hyphen_values = true)]
    pub seed_box: Vec<String>,
    #[arg(long, default_value_t = 256)]
    pub seeds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed_offset: usize,
    #[command(flatten)]
    pub tol: TolArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[arg(long)]
    pub codim: usize,
    #[arg(long, value_delimiter = ',')]
    pub unfold: Vec<String>,
    /// Every variable and free parameter, `name=value,...`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub at: Vec<String>,
    #[command(flatten)]
    pub tol: TolArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    /// Two parameter names.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub axes: Vec<String>,
    /// `lo:hi,lo:hi`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub range: Vec<String>,
    /// Cells per axis; one value applies to both.
    #[arg(long, value_delimiter = ',', default_value = "21")]
    pub cells: Vec<usize>,
    /// Box for the state variables, `lo:hi,...`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub box_x: Vec<String>,
    #[arg(long, default_value_t = 256)]
    pub seeds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed_offset: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol_b: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CountArgs {
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub codim: usize,
    /// Corank at each stage; defaults to all ones.
    #[arg(long, value_delimiter = ',')]
    pub corank_seq: Vec<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoardmanArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    /// Every variable, plus values for any parameters not fixed.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub at: Vec<String>,
    #[arg(long, default_value_t = 6)]
    pub max_depth: usize,
    #[arg(long, default_value_t = catafind_core::boardman::DEFAULT_CAP)]
    pub cap: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol_b: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
