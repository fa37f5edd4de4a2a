//! `ostar` — tables, identities and moments of the shifted-prime divisor
//! function from the command line.
//!
//! Exit codes: 0 success, 1 verification failure (a checked identity did
//! not hold), 2 usage or configuration error, 3 resource or work-budget
//! exhaustion.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use commands::{Ctx, OutputFormat, VerificationFailed, VerifyCheck};
use ostar_core::moments::DEFAULT_WORK_BUDGET;
use ostar_core::sieves::SieveConfig;
use ostar_core::verify::DEFAULT_T_MAX;
use output::{parse_grid, parse_klist};

const DEFAULT_SEED: u64 = 0xC0FFEE;

#[derive(Parser)]
#[command(name = "ostar", version, about = "shifted-prime divisor function toolkit")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalOpts {
    /// Seed for all randomized campaigns; fixed default keeps runs
    /// reproducible.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Worker threads; defaults to the SDL_THREADS environment variable,
    /// then to the number of cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Work budget in enumeration nodes.
    #[arg(long, global = true, default_value_t = DEFAULT_WORK_BUDGET)]
    budget: u64,
    /// Output file; stdout when omitted. Files are written atomically.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format for tabular artifacts.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
}

#[derive(Subcommand)]
enum Command {
    /// Build the count table, print a summary, optionally dump it.
    Omega {
        #[arg(long)]
        x: u64,
        /// Binary dump path for the table.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Exact moments with normalized ratios over a grid.
    Moments {
        /// Geometric grid `a:b:factor` or explicit comma list.
        #[arg(long = "x-grid", default_value = "100000:100000000:10")]
        x_grid: String,
        /// Moment orders: `3`, `1,2,3` or `2..6`.
        #[arg(long, default_value = "1,2,3")]
        k: String,
    },
    /// Tuple count with lcm bound, cross-checked against the table moment.
    Pk {
        #[arg(long)]
        x: u64,
        #[arg(long)]
        k: u32,
    },
    /// Run a verification campaign and emit a JSON report.
    Verify {
        #[arg(value_enum)]
        check: VerifyCheck,
        /// Overrides the per-check default k range.
        #[arg(long)]
        k: Option<String>,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        /// Primes for the enumeration and weight-sum checks.
        #[arg(long, default_value = "2,3")]
        primes: String,
        /// Exponent cap for the exhaustive profile enumeration.
        #[arg(long = "max-exp", default_value_t = 2)]
        max_exp: u32,
        /// Upper bound for sampled tuple entries.
        #[arg(long = "t-max", default_value_t = DEFAULT_T_MAX)]
        t_max: u64,
    },
    /// Tail counts N(x, y) with the Markov cross-check.
    Distribution {
        #[arg(long)]
        x: u64,
        /// Thresholds; defaults to the doubling grid 2,4,8,... up to the
        /// largest count.
        #[arg(long = "y-grid")]
        y_grid: Option<String>,
        /// Moment orders for the Markov check.
        #[arg(long, default_value = "1,2,3,4")]
        k: String,
    },
    /// Exponential level profile of the counts.
    Profile {
        #[arg(long)]
        x: u64,
        /// Weight order.
        #[arg(long, default_value_t = 1)]
        j: u32,
    },
    /// Partial sums of f(n)/n for a rule-defined multiplicative function.
    Wirsing {
        /// Builtin name (`unit`, `squarefree`, `tau_l:L`,
        /// `phi_ratio_power:S`), inline JSON, or path to a JSON spec.
        #[arg(long)]
        spec: String,
        #[arg(long = "x-grid", default_value = "10000:10000000:10")]
        x_grid: String,
    },
    /// Fit growth exponents from a previously written moments CSV.
    Fit {
        /// Input CSV with header x,k,sum,ratio.
        input: PathBuf,
    },
}

fn run(cli: Cli) -> Result<()> {
    let ctx = Ctx {
        seed: cli.global.seed,
        budget: cli.global.budget,
        out: cli.global.out.clone(),
        format: cli.global.format,
        sieve: SieveConfig::default(),
    };
    match cli.command {
        Command::Omega { x, dump } => commands::cmd_omega(&ctx, x, dump.as_deref()),
        Command::Moments { x_grid, k } => {
            commands::cmd_moments(&ctx, &parse_grid(&x_grid)?, &parse_klist(&k)?)
        }
        Command::Pk { x, k } => commands::cmd_pk(&ctx, x, k),
        Command::Verify {
            check,
            k,
            trials,
            primes,
            max_exp,
            t_max,
        } => {
            let ks = k.map(|s| parse_klist(&s)).transpose()?;
            let primes: Vec<u64> = primes
                .split(',')
                .map(|p| p.trim().parse::<u64>())
                .collect::<std::result::Result<_, _>>()?;
            commands::cmd_verify(&ctx, check, ks, trials, &primes, max_exp, t_max)
        }
        Command::Distribution { x, y_grid, k } => {
            let y = y_grid.map(|s| parse_grid(&s)).transpose()?;
            commands::cmd_distribution(&ctx, x, y, &parse_klist(&k)?)
        }
        Command::Profile { x, j } => commands::cmd_profile(&ctx, x, j),
        Command::Wirsing { spec, x_grid } => {
            let spec = commands::parse_func_spec(&spec)?;
            commands::cmd_wirsing(&ctx, &spec, &parse_grid(&x_grid)?)
        }
        Command::Fit { input } => commands::cmd_fit(&ctx, &input),
    }
}

/// Exit code for a failed run: 1 for falsified checks, 2 for bad input,
/// 3 for exhausted budgets and i/o trouble.
fn classify(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<VerificationFailed>().is_some() {
        return 1;
    }
    if let Some(core) = err.downcast_ref::<ostar_core::Error>() {
        return match core {
            ostar_core::Error::InvalidInput(_) | ostar_core::Error::BadDump(_) => 2,
            ostar_core::Error::MemoryBudget { .. }
            | ostar_core::Error::WorkBudget { .. }
            | ostar_core::Error::Io(_) => 3,
            ostar_core::Error::Overflow(_)
            | ostar_core::Error::NonIntegralFactor { .. }
            | ostar_core::Error::InvariantViolation { .. } => 1,
        };
    }
    if err.downcast_ref::<std::io::Error>().is_some() {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.global.threads.or_else(|| {
        std::env::var("SDL_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(classify(&err))
        }
    }
}
