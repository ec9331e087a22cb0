//! `bernstein`: fit, evaluate, and benchmark Bernstein polynomial density estimates.

mod commands;
mod input;
mod json;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use bernstein_mle::{InitScheme, SupportSpec};
use clap::{Args, Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    Io(String),
    Parse(String),
    Numeric(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 2,
            CliError::Parse(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Io(m) | CliError::Parse(m) | CliError::Numeric(m) => m,
        }
    }
}

impl From<bernstein_mle::Error> for CliError {
    fn from(e: bernstein_mle::Error) -> Self {
        CliError::Numeric(e.to_string())
    }
}

/// Support choice: `a,b`, `auto` (sample range, widened slightly),
/// `unbounded`, `left:a`, or `right:b`.
#[derive(Debug, Clone, Copy)]
pub struct SupportArg(pub SupportSpec);

impl FromStr for SupportArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("bad number '{t}' in support"));
        let spec = match s.trim() {
            "auto" | "data-range" => SupportSpec::DataRange,
            "unbounded" => SupportSpec::Unbounded,
            t if t.starts_with("left:") => SupportSpec::LeftBounded(num(&t[5..])?),
            t if t.starts_with("right:") => SupportSpec::RightBounded(num(&t[6..])?),
            t => {
                let (a, b) = t
                    .split_once(',')
                    .ok_or_else(|| format!("support '{t}' is not a,b / auto / unbounded / left:a / right:b"))?;
                SupportSpec::Known(num(a)?, num(b)?)
            }
        };
        Ok(SupportArg(spec))
    }
}

/// `auto` or a fixed non-negative degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeArg {
    Auto,
    Fixed(usize),
}

impl FromStr for DegreeArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "auto" => Ok(DegreeArg::Auto),
            t => t.parse().map(DegreeArg::Fixed).map_err(|_| format!("degree '{t}' is not 'auto' or an integer")),
        }
    }
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum InitArg {
    Uniform,
    Binomial,
    Empirical,
}

impl From<InitArg> for InitScheme {
    fn from(a: InitArg) -> Self {
        match a {
            InitArg::Uniform => InitScheme::Uniform,
            InitArg::Binomial => InitScheme::Binomial,
            InitArg::Empirical => InitScheme::Empirical,
        }
    }
}

#[derive(Debug, Args)]
pub struct ModelOpts {
    /// Sample file: one value per line, '#' comments allowed.
    pub input: PathBuf,
    /// Support: a,b | auto | unbounded | left:a | right:b
    #[arg(long, default_value = "auto", allow_hyphen_values = true)]
    pub support: SupportArg,
    /// First degree of the selection grid.
    #[arg(long)]
    pub m0: Option<usize>,
    /// Number of steps in the selection grid.
    #[arg(long)]
    pub k: Option<usize>,
    /// Known density value at the left end of the support (raw scale).
    #[arg(long)]
    pub f0: Option<f64>,
    /// Known density value at the right end of the support (raw scale).
    #[arg(long)]
    pub f1: Option<f64>,
    /// Constrain the density to be symmetric about the midpoint of the support.
    #[arg(long)]
    pub symmetric: bool,
    /// Relative log-likelihood tolerance for EM.
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    #[arg(long, value_enum, default_value = "uniform")]
    pub init: InitArg,
    /// Output path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Parser)]
#[command(name = "bernstein", version, about = "Bernstein polynomial density estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a model and write it as JSON.
    Fit {
        #[command(flatten)]
        opts: ModelOpts,
        /// Degree: an integer or 'auto' for change-point selection.
        #[arg(long, default_value = "auto")]
        degree: DegreeArg,
    },
    /// Evaluate a fitted model on an equally spaced grid, writing CSV x,pdf,cdf.
    Eval {
        /// Model JSON written by 'fit'.
        model: PathBuf,
        /// Grid start; defaults to the support's lower end.
        #[arg(long, allow_hyphen_values = true)]
        from: Option<f64>,
        /// Grid end; defaults to the support's upper end.
        #[arg(long, allow_hyphen_values = true)]
        to: Option<f64>,
        #[arg(long, default_value_t = 201)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print degree-selection diagnostics as JSON.
    SelectDegree {
        #[command(flatten)]
        opts: ModelOpts,
    },
    /// Run the Monte Carlo comparison for one distribution.
    Simulate {
        /// Preset name (see 'presets') or family string such as beta:5,7.
        #[arg(long)]
        dist: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        runs: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Report JSON path; when absent the JSON goes to standard output and the
        /// table to standard error.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the pointwise MSE grids as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Exit with status 4 if any run fails.
        #[arg(long)]
        strict: bool,
    },
    /// List the benchmark distributions.
    Presets,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Fit { opts, degree } => commands::fit(&opts, degree),
        Command::Eval { model, from, to, points, out } => {
            commands::eval(&model, from, to, points, out.as_deref())
        }
        Command::SelectDegree { opts } => commands::select_degree(&opts),
        Command::Simulate { dist, n, runs, seed, out, csv, strict } => {
            commands::simulate(&dist, n, runs, seed, out.as_deref(), csv.as_deref(), strict)
        }
        Command::Presets => commands::presets(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(3) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
