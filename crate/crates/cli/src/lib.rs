//! The `rfpca` command: simulate, fit, reconstruct, evaluate and convert
//! compositional counts, with file formats shared across subcommands.
//!
//! Exit codes: 0 success, 2 validation error, 3 numerical failure, 4 I/O.
//! Failures print one line to stderr:
//! `error: kind=<Kind> class=<class> message="<text>"`.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rfpca::{Error, ErrorClass, ManifoldSpec};

mod commands;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "rfpca", version, about = "Riemannian functional PCA for trajectories on spheres and SO(3)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw synthetic trajectories and write them with their ground truth.
    Simulate(SimulateArgs),
    /// Fit RFPCA to a trajectory CSV and write the model JSON.
    Fit(FitArgs),
    /// Write truncated reconstructions or modes of variation of a fitted model.
    Reconstruct(ReconstructArgs),
    /// Tabulate residual variance and FVE by number of components.
    Fve(FveArgs),
    /// Smooth and normalize count panels into sphere trajectories.
    Compositional(CompositionalArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// `sphere:<d>` or `so3`.
    #[arg(long)]
    pub manifold: ManifoldSpec,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 20)]
    pub m: usize,
    #[arg(long)]
    pub seed: u64,
    /// Number of nonzero score components (1 to 20).
    #[arg(long, default_value_t = 20)]
    pub components: usize,
    /// Trajectory CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Ground-truth JSON; defaults to the CSV path with extension `truth.json`.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub manifold: ManifoldSpec,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub kmax: usize,
    /// FVE threshold for the reported component count.
    #[arg(long, default_value_t = 0.95)]
    pub gamma: f64,
    /// Model JSON.
    #[arg(long)]
    pub out: PathBuf,
    /// Mark the input as square-root embedded compositions.
    #[arg(long)]
    pub compositional: bool,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Number of components in each reconstruction.
    #[arg(long = "K", default_value_t = 0)]
    pub k: usize,
    /// Write the mode of variation of this component instead of subject curves.
    #[arg(long)]
    pub mode: Option<usize>,
    /// Multiple of the component's standard deviation used by `--mode`.
    #[arg(long, default_value_t = 3.0)]
    pub scale: f64,
    #[arg(long)]
    pub out: PathBuf,
    /// Composition CSV for compositional models; defaults to the output path
    /// with extension `composition.csv`.
    #[arg(long)]
    pub composition_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Baseline {
    L2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChartArg {
    Ambient,
    Lonlat,
}

#[derive(Debug, Args)]
pub struct FveArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// The trajectory CSV the model was fitted to.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub baseline: Option<Baseline>,
    #[arg(long = "l2-chart", value_enum, default_value_t = ChartArg::Ambient)]
    pub l2_chart: ChartArg,
}

#[derive(Debug, Args)]
pub struct CompositionalArgs {
    /// Count CSV with header `id,t,c1,...,cJ`.
    #[arg(long)]
    pub counts: PathBuf,
    #[arg(long)]
    pub bandwidth: f64,
    /// Number of evaluation points per subject.
    #[arg(long)]
    pub grid: usize,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn exit_code(error: &Error) -> i32 {
    match error.class() {
        ErrorClass::Validation => EXIT_VALIDATION,
        ErrorClass::Numerical => EXIT_NUMERICAL,
        ErrorClass::Io => EXIT_IO,
    }
}

fn class_name(class: ErrorClass) -> &'static str {
    match class {
        ErrorClass::Validation => "validation",
        ErrorClass::Numerical => "numerical",
        ErrorClass::Io => "io",
    }
}

/// The single stderr line describing `error`.
pub fn error_line(error: &Error) -> String {
    let message = error.to_string().replace('\n', " ");
    format!("error: kind={} class={} message={message:?}", error.kind(), class_name(error.class()))
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            let rendered = e.to_string();
            let first = rendered.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("error: kind=UsageError class=validation message={first:?}");
            return EXIT_VALIDATION;
        }
    };
    match commands::execute(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("{}", error_line(&e));
            exit_code(&e)
        }
    }
}
