//! `logminor`: generate matrices, sample or enumerate log-minors, evaluate
//! bounds, plan sample sizes, and reproduce the reference table.
//!
//! Exit codes: 0 success, 1 a hard assertion failed, 2 usage error,
//! 3 numerical error.

mod commands;
mod matrix_file;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use logminor::exact::{SearchModel, DEFAULT_ENUMERATION_CAP};
use logminor::{BoundChoice, GeneratorKind, LogBase, PlanMetric, DEFAULT_SEED};

use commands::{Common, ContextArgs, PipelineArgs, RGrid, SampleArgs};
use output::Format;

#[derive(Parser)]
#[command(
    name = "logminor",
    version,
    about = "Log-minor distributions and sampled mean subsystem entropy"
)]
struct Cli {
    /// Seed for every random stream.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Output format. `gen` writes the plain matrix text format when unset.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write machine-readable output here; the human summary then goes to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report logarithmic quantities in this base (default: natural log).
    #[arg(long, global = true, default_value_t = std::f64::consts::E)]
    log_base: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Haar,
    Diagonal,
}

#[derive(Args)]
struct Context {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    kappa_hat: f64,
    #[arg(long)]
    q: Option<u64>,
    /// ℓ(M) = min(|log λ1|, |log λn|), in the `--log-base` units.
    #[arg(long)]
    ell: Option<f64>,
    /// The matrix is diagonal, enabling the diagonal bound.
    #[arg(long)]
    diagonal: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a test matrix.
    Gen {
        /// e1, e2, e3, e4, two-level, uniform, wishart or custom.
        #[arg(long)]
        kind: GeneratorKind,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 3.0)]
        kappa: f64,
        /// Number of eigenvalues equal to κ (two-level).
        #[arg(long)]
        ell: Option<usize>,
        /// Wishart degrees of freedom (default 2n).
        #[arg(long)]
        dof: Option<usize>,
        /// Comma-separated eigenvalues (custom).
        #[arg(long, value_delimiter = ',')]
        spectrum: Option<Vec<f64>>,
    },
    /// Sample log-minors and report S_Y, S_h and their error bounds.
    Sample {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        q: usize,
        /// Upper bound on κ(M); defaults to the exact condition number.
        #[arg(long)]
        kappa_hat: Option<f64>,
        /// Draw distinct subsets instead of i.i.d. ones.
        #[arg(long)]
        distinct: bool,
        /// Also write every drawn log-minor to this CSV file.
        #[arg(long)]
        dump_values: Option<PathBuf>,
    },
    /// Enumerate every principal k-minor.
    Exact {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        k: usize,
        /// Refuse to enumerate more than this many subsets.
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: u128,
        /// Suppress progress on stderr.
        #[arg(long)]
        quiet: bool,
        #[arg(long)]
        dump_values: Option<PathBuf>,
    },
    /// Evaluate variance, tail, standard-error and CV bounds.
    Bounds {
        #[command(flatten)]
        context: Context,
        /// Tail grid `start:stop:step` (in `--log-base` units).
        #[arg(long)]
        r_grid: Option<RGrid>,
    },
    /// Smallest sample size whose bound meets a target.
    Plan {
        #[command(flatten)]
        context: Context,
        /// se-logminor, se-entropy, cv-logminor or cv-entropy.
        #[arg(long)]
        metric: PlanMetric,
        #[arg(long)]
        target: f64,
        /// exponential, support or diagonal.
        #[arg(long, default_value = "support")]
        bound: BoundChoice,
    },
    /// Look for matrices whose log-minor variance beats every two-level diagonal.
    Conjecture {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 3.0)]
        kappa: f64,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, value_enum, default_value = "haar")]
        model: Model,
    },
    /// Reproduce the n = 20, κ = 3 reference table and emit figure data.
    Verify {
        #[arg(long, default_value_t = logminor::reproduce::DEFAULT_BINS)]
        bins: usize,
        /// Directory for densities.csv, tails.csv and sampling_bounds.csv.
        #[arg(long)]
        figure_dir: Option<PathBuf>,
    },
    /// Standard-error and CV bound sweeps (CSV unless `--format json`).
    FigureData {
        #[arg(long, default_value_t = 3.0)]
        kappa_hat: f64,
        #[arg(long, default_value_t = 1.0)]
        ell: f64,
        /// Sample size per unit of k.
        #[arg(long, default_value_t = 2000)]
        q_per_k: u64,
    },
    /// Load a matrix, plan q for a target accuracy, sample, and report.
    Pipeline {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        target: f64,
        #[arg(long, default_value = "se-entropy")]
        metric: PlanMetric,
        #[arg(long, default_value = "support")]
        bound: BoundChoice,
        #[arg(long)]
        kappa_hat: Option<f64>,
    },
}

impl From<Context> for ContextArgs {
    fn from(c: Context) -> Self {
        Self {
            n: c.n,
            k: c.k,
            kappa_hat: c.kappa_hat,
            q: c.q,
            ell: c.ell,
            diagonal: c.diagonal,
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    let log_base = LogBase::new(cli.log_base)?;
    let common = Common {
        seed: cli.seed,
        format: cli.format,
        out: cli.out.as_deref(),
        log_base,
    };
    let c = &common;
    match cli.command {
        Command::Gen {
            kind,
            n,
            kappa,
            ell,
            dof,
            spectrum,
        } => commands::gen(
            c,
            commands::generator_spec(kind, n, kappa, ell, dof, spectrum, cli.seed)?,
        ),
        Command::Sample {
            matrix,
            k,
            q,
            kappa_hat,
            distinct,
            dump_values,
        } => commands::sample(
            c,
            SampleArgs {
                matrix: &matrix,
                k,
                q,
                kappa_hat,
                distinct,
                dump_values: dump_values.as_deref(),
            },
        ),
        Command::Exact {
            matrix,
            k,
            cap,
            quiet,
            dump_values,
        } => commands::exact(c, &matrix, k, cap, quiet, dump_values.as_deref()),
        Command::Bounds { context, r_grid } => {
            let mut a = ContextArgs::from(context);
            a.ell = a.ell.map(|l| l * log_base.base().ln());
            commands::bounds(c, &a, r_grid.as_ref())
        }
        Command::Plan {
            context,
            metric,
            target,
            bound,
        } => {
            let mut a = ContextArgs::from(context);
            a.ell = a.ell.map(|l| l * log_base.base().ln());
            commands::plan(c, &a, metric, bound, target)
        }
        Command::Conjecture {
            n,
            k,
            kappa,
            trials,
            model,
        } => {
            let model = match model {
                Model::Haar => SearchModel::HaarConjugated,
                Model::Diagonal => SearchModel::DiagonalVertices,
            };
            commands::conjecture(c, n, k, kappa, trials, model)
        }
        Command::Verify { bins, figure_dir } => commands::verify(c, bins, figure_dir.as_ref()),
        Command::FigureData {
            kappa_hat,
            ell,
            q_per_k,
        } => commands::figure_data(c, kappa_hat, ell, q_per_k),
        Command::Pipeline {
            matrix,
            k,
            target,
            metric,
            bound,
            kappa_hat,
        } => commands::pipeline(
            c,
            PipelineArgs {
                matrix: &matrix,
                k,
                target,
                metric,
                bound,
                kappa_hat,
            },
        ),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let numerical = err
        .chain()
        .filter_map(|e| e.downcast_ref::<logminor::Error>())
        .any(logminor::Error::is_numerical);
    if numerical {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
