use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::output::Grid;

#[derive(Debug, Parser)]
#[command(name = "catastrophe", version, about = "Simulate and validate the (max,rand) catastrophe fitness model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate closed-form laws on a point or grid and emit CSV.
    Analytic {
        #[command(subcommand)]
        law: AnalyticLaw,
    },
    /// Run a field simulation and write histogram, field and manifest files.
    Simulate(SimulateArgs),
    /// Run a named verification suite; exit 1 if any check fails.
    Verify(VerifyArgs),
    /// Emit the data behind the figures.
    Figure(FigureArgs),
}

/// One value (`--u`) or an inclusive grid (`--u-grid lo:hi:count`).
#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct UPoints {
    #[arg(long)]
    pub u: Option<f64>,
    #[arg(long = "u-grid", value_parser = parse_grid)]
    pub u_grid: Option<Grid>,
}

#[derive(Debug, Subcommand)]
pub enum AnalyticLaw {
    /// Marginal CDF φ_t(u); `--t inf` gives the stationary φ(u).
    Phi {
        #[arg(long)]
        p: f64,
        /// Horizon: nonnegative integer or `inf`.
        #[arg(long)]
        t: String,
        #[command(flatten)]
        points: UPoints,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stationary covariance of the indicators 1{η(1) <= u1}, 1{η(2) <= u2}.
    Cov {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        u1: f64,
        #[arg(long, required_unless_present = "u2_grid", conflicts_with = "u2_grid")]
        u2: Option<f64>,
        #[arg(long = "u2-grid", value_parser = parse_grid)]
        u2_grid: Option<Grid>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Staircase CDF F(x) = p^(k(x)-1) of the stationary mixing variable u^G.
    Staircase {
        #[arg(long)]
        p: f64,
        /// Level u of the mixing variable.
        #[arg(long)]
        u: f64,
        #[arg(long, required_unless_present = "x_grid", conflicts_with = "x_grid")]
        x: Option<f64>,
        #[arg(long = "x-grid", value_parser = parse_grid)]
        x_grid: Option<Grid>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Joint CDF P(η_t(k) <= u_k for all k).
    Joint {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        t: String,
        /// Comma separated levels.
        #[arg(long, value_delimiter = ',', required = true)]
        us: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generating function E(s^Θ) of the stationary mixing variable.
    Pgf {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        u: f64,
        #[arg(long = "s-grid", value_parser = parse_grid, default_value = "0:1:11")]
        s_grid: Grid,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// maxrand, maxmin or baksneppen.
    #[arg(long)]
    pub model: String,
    #[arg(long, default_value_t = 0.9)]
    pub p: f64,
    #[arg(long, default_value_t = 10_000)]
    pub sites: usize,
    #[arg(long, default_value_t = 1000)]
    pub steps: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// uniform, stationary, constant:C or explicit:v1,v2,...
    #[arg(long, default_value = "uniform")]
    pub init: String,
    #[arg(long, default_value_t = 50)]
    pub bins: usize,
    #[arg(long = "out-prefix")]
    pub out_prefix: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Suite name (see `verify --list`).
    #[arg(required_unless_present = "list")]
    pub suite: Option<String>,
    /// List the registered suites.
    #[arg(long)]
    pub list: bool,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub u: Option<f64>,
    #[arg(long)]
    pub u2: Option<f64>,
    #[arg(long)]
    pub t: Option<u64>,
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long)]
    pub reps: Option<u64>,
    #[arg(long)]
    pub sites: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureKind {
    Fig1,
    Fig2,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    #[arg(value_enum)]
    pub which: FigureKind,
    #[arg(long = "out-prefix")]
    pub out_prefix: PathBuf,
    /// Seed for the fig1 simulation.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    s.parse()
}
