use clap::{Args, Parser, Subcommand, ValueEnum};
use std::f64::consts::TAU;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "qesforge", version, about = "Construct and check periodic potentials with three known band-edge states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check whether a generating function admits the construction.
    Validate(ValidateArgs),
    /// Build the system and export it on a uniform grid.
    Construct(ConstructArgs),
    /// Compare a system (or an exported grid) with the band-edge oracle.
    Verify(VerifyArgs),
    /// Export a worked example next to its closed forms.
    Example(ExampleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExampleName {
    Razavy,
}

#[derive(Debug, Args)]
pub struct SystemArgs {
    /// Generating function U(x); may use eps0 and eps1.
    #[arg(long = "u", value_name = "EXPR")]
    pub u: String,
    #[arg(long)]
    pub eps0: f64,
    #[arg(long)]
    pub eps1: f64,
    #[arg(long, default_value_t = TAU)]
    pub period: f64,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Print the report as JSON instead of text.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Grid points over one period.
    #[arg(long, default_value_t = 1024, value_parser = clap::value_parser!(u32).range(64..))]
    pub grid: u32,
    /// Output file; standard output when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Defaults to json for a `.json` output path, csv otherwise.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Exported grid (CSV or JSON) to verify instead of a generator.
    #[arg(long, value_name = "PATH", conflicts_with_all = ["u", "eps0", "eps1", "period", "perturb"])]
    pub input: Option<PathBuf>,
    #[arg(long = "u", value_name = "EXPR", required_unless_present = "input")]
    pub u: Option<String>,
    #[arg(long, required_unless_present = "input")]
    pub eps0: Option<f64>,
    #[arg(long, required_unless_present = "input")]
    pub eps1: Option<f64>,
    #[arg(long)]
    pub period: Option<f64>,
    /// Harmonics of the oracle basis.
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u32).range(16..))]
    pub modes: u32,
    /// Energy tolerance.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Expression added to both potentials before checking.
    #[arg(long, value_name = "EXPR")]
    pub perturb: Option<String>,
    /// Print the report as JSON instead of text.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct ExampleArgs {
    #[arg(value_enum)]
    pub name: ExampleName,
    #[arg(long, default_value_t = 1.0)]
    pub eps0: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}
