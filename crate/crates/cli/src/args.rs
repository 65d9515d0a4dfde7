use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use feo_core::solver::SolveMode;

#[derive(Debug, Parser)]
#[command(name = "feo", version, about = "Edit Bayesian networks toward fair equality of opportunity")]
pub struct Cli {
    /// Machine-readable summaries on stdout and JSON diagnostics on stderr.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a network and, when given, its roles and constraints.
    Validate(BundleArgs),
    /// Fit CPTs for a fixed structure from a CSV file.
    Learn(LearnArgs),
    /// Edit the control CPT so the target is independent of the sensitive variables.
    Solve(SolveArgs),
    /// Write pre/post conditional tables and a deviation summary.
    Report(ReportArgs),
    /// Draw synthetic records from a network.
    Sample(SampleArgs),
    /// List or export the bundled scenarios.
    #[command(subcommand)]
    Fixture(FixtureCommand),
}

/// A scenario given either as files or as a bundled fixture name.
#[derive(Debug, Args)]
pub struct BundleArgs {
    /// Bundled scenario to use instead of --network/--roles.
    #[arg(long, conflicts_with_all = ["network", "roles"])]
    pub fixture: Option<String>,
    /// Network document (JSON).
    #[arg(long)]
    pub network: Option<PathBuf>,
    /// Roles document (JSON).
    #[arg(long)]
    pub roles: Option<PathBuf>,
    /// Feasibility constraints (JSON); overrides a fixture's own.
    #[arg(long)]
    pub constraints: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    /// Raw CSV data.
    #[arg(long)]
    pub data: PathBuf,
    /// Column selection and discretization rules (JSON).
    #[arg(long)]
    pub schema: PathBuf,
    /// Variables, states and edges (JSON).
    #[arg(long)]
    pub structure: PathBuf,
    /// Additive smoothing pseudo-count.
    #[arg(long, default_value_t = 0.0)]
    pub smoothing: f64,
    /// Where to write the fitted network.
    #[arg(long)]
    pub out: PathBuf,
    /// Where to write the ingestion provenance.
    #[arg(long)]
    pub provenance: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Mode {
    /// Exact when possible, closest otherwise.
    Auto,
    /// Fail unless the equalities hold exactly.
    Exact,
    /// Least-squares solution.
    Closest,
}

impl From<Mode> for SolveMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Auto => SolveMode::Auto,
            Mode::Exact => SolveMode::Exact,
            Mode::Closest => SolveMode::Closest,
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub bundle: BundleArgs,
    #[arg(long, value_enum, default_value_t = Mode::Auto)]
    pub mode: Mode,
    /// Where to write the corrected network.
    #[arg(long)]
    pub out: PathBuf,
    /// Where to write the solution report; defaults to solution.json beside --out.
    #[arg(long)]
    pub solution: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub bundle: BundleArgs,
    /// Corrected network to compare against; solved on the fly when absent.
    #[arg(long)]
    pub post: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Mode::Auto)]
    pub mode: Mode,
    /// Directory receiving pre.csv, post.csv and summary.json.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Network document (JSON).
    #[arg(long, required_unless_present = "fixture")]
    pub network: Option<PathBuf>,
    /// Bundled scenario whose network to sample.
    #[arg(long, conflicts_with = "network")]
    pub fixture: Option<String>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub count: u64,
    #[arg(long)]
    pub seed: u64,
    /// Comma-separated subset of variables to write.
    #[arg(long, value_delimiter = ',')]
    pub columns: Option<Vec<String>>,
    /// CSV destination; the manifest goes beside it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum FixtureCommand {
    List,
    /// Write a fixture's documents into a directory.
    Export {
        name: String,
        #[arg(long)]
        dir: PathBuf,
    },
}
