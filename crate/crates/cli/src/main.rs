//! `spinmarket` — reproducible batch experiments for the spin-market
//! toolkit.
//!
//! Exit codes: 0 success, 1 config error, 2 runtime/model error.

mod commands;
mod config;
mod schema;

use clap::{Args, Parser, Subcommand, ValueEnum};
use commands::{execute, CliError, Invocation};
use spinmarket::persistence::DataFormat;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "spinmarket",
    version,
    about = "Kinetic Ising market simulator, discrete-choice sampler and return-series statistics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one market simulation and write the trajectory
    #[command(after_help = schema::render_help("simulate"))]
    Simulate(RunArgs),
    /// Order/disorder sweep over a coupling grid (one seeded run per point)
    #[command(after_help = schema::render_help("sweep"))]
    Sweep(RunArgs),
    /// Paired-seed noise-induced-volatility experiment
    #[command(after_help = schema::render_help("nivol"))]
    Nivol(RunArgs),
    /// Stylized-facts report for a stored price series
    #[command(after_help = schema::render_help("stylized"))]
    Stylized(RunArgs),
    /// Logit probabilities vs Monte Carlo argmax frequencies
    #[command(after_help = schema::render_help("choice"))]
    Choice(RunArgs),
    /// Prospect probabilities from a prospect-set JSON document
    #[command(after_help = schema::render_help("qdt"))]
    Qdt(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config file (sectioned key=value, or JSON; qdt takes the
    /// prospect-set JSON document itself)
    #[arg(long)]
    config: PathBuf,
    /// Output directory [default: $SPINMARKET_OUT/<subcommand> or runs/<subcommand>]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config seed (wins over the file, recorded in the manifest)
    #[arg(long)]
    seed: Option<u64>,
    /// Bound on concurrent jobs for sweep/nivol (needs the parallel build)
    #[arg(long)]
    jobs: Option<usize>,
    /// Encoding for tabular outputs
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

fn invocation(subcommand: &'static str, args: RunArgs) -> Invocation {
    Invocation {
        subcommand,
        config_path: args.config,
        out: args.out,
        seed_override: args.seed,
        jobs: args.jobs,
        format: match args.format {
            FormatArg::Csv => DataFormat::Csv,
            FormatArg::Json => DataFormat::Json,
        },
    }
}

fn run(invocation: &Invocation) -> Result<String, CliError> {
    #[cfg(feature = "parallel")]
    if let Some(jobs) = invocation.jobs {
        if jobs == 0 {
            return Err(CliError::Config("--jobs must be >= 1".to_string()));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| CliError::Runtime(format!("cannot build thread pool: {e}")))?;
        return pool.install(|| execute(invocation));
    }
    #[cfg(not(feature = "parallel"))]
    if invocation.jobs.is_some() {
        eprintln!("note: sequential build, --jobs has no effect");
    }
    execute(invocation)
}

fn main() {
    let cli = Cli::parse();
    let invocation = match cli.command {
        Command::Simulate(args) => invocation("simulate", args),
        Command::Sweep(args) => invocation("sweep", args),
        Command::Nivol(args) => invocation("nivol", args),
        Command::Stylized(args) => invocation("stylized", args),
        Command::Choice(args) => invocation("choice", args),
        Command::Qdt(args) => invocation("qdt", args),
    };
    match run(&invocation) {
        Ok(summary) => println!("{summary}"),
        Err(CliError::Config(msg)) => {
            eprintln!("config error: {msg}");
            std::process::exit(1);
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(2);
        }
    }
}
