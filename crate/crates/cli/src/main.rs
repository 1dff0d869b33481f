use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use repcut_cli::algorithms::{Algorithm, SolveConfig};
use repcut_cli::commands::{self, Failure, SolveArgs};

#[derive(Parser)]
#[command(name = "repcut", version, about = "Multiway cut with candidate representatives")]
struct Cli {
    /// Worker threads for the parallel solvers (default: all cores).
    #[arg(long, global = true, env = "REPCUT_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Rounding {
    /// Seed for every randomized step (overrides the params file).
    #[arg(long)]
    seed: Option<u64>,
    /// Rounding samples per relaxation; the lightest is kept.
    #[arg(long, default_value_t = 200)]
    samples: u64,
    /// TOML file with any of `b`, `p`, `phi`, `seed`.
    #[arg(long)]
    params_file: Option<PathBuf>,
}

#[derive(clap::Args)]
struct Limits {
    /// Largest instance the oracle accepts.
    #[arg(long, default_value_t = 9)]
    max_nodes: usize,
    /// Wall-clock budget for the oracle in seconds.
    #[arg(long)]
    time_budget: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance and validate the result.
    Solve {
        instance: PathBuf,
        #[arg(short, long, value_enum, default_value_t = Algorithm::Auto)]
        algorithm: Algorithm,
        #[command(flatten)]
        rounding: Rounding,
        /// Cap on q for the enumeration algorithms.
        #[arg(long)]
        q_cap: Option<usize>,
        #[command(flatten)]
        limits: Limits,
        /// Write the solution file here.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check a solution file against an instance.
    Validate { instance: PathBuf, solution: PathBuf },
    /// Translate an instance along one of the reductions.
    Reduce {
        input: PathBuf,
        /// fixed-to-single, some-to-single, some-to-all, some-to-some or steiner.
        #[arg(short, long)]
        target: String,
        /// Write the reduced instance here (default: standard output).
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Map sidecar path (default: the output path plus `.map`).
        #[arg(long)]
        map: Option<PathBuf>,
    },
    /// Solve exactly by exhaustive search.
    Oracle {
        instance: PathBuf,
        #[command(flatten)]
        limits: Limits,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compare every applicable solver with the oracle over a directory.
    Audit {
        corpus: PathBuf,
        #[command(flatten)]
        rounding: Rounding,
        #[command(flatten)]
        limits: Limits,
    },
    /// Print the relaxation LP in LP file format.
    LpDump {
        instance: PathBuf,
        /// Representatives, one per candidate set, for the single variants.
        #[arg(long, value_delimiter = ',')]
        reps: Vec<String>,
    },
}

fn config(rounding: &Rounding, limits: &Limits, q_cap: Option<usize>) -> Result<SolveConfig, Failure> {
    if rounding.samples == 0 {
        return Err(Failure::Usage("--samples must be positive".into()));
    }
    Ok(SolveConfig {
        params: commands::rounding_params(rounding.params_file.as_deref(), rounding.seed)?,
        samples: rounding.samples,
        q_cap,
        limits: commands::oracle_limits(limits.max_nodes, limits.time_budget)?,
    })
}

fn run(cli: Cli) -> commands::Outcome {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Rejected(format!("cannot start the thread pool: {e}")))?;
    }
    match cli.command {
        Command::Solve {
            instance,
            algorithm,
            rounding,
            q_cap,
            limits,
            output,
        } => commands::solve(&SolveArgs {
            instance,
            algorithm,
            config: config(&rounding, &limits, q_cap)?,
            output,
        }),
        Command::Validate { instance, solution } => commands::validate(&instance, &solution),
        Command::Reduce {
            input,
            target,
            output,
            map,
        } => commands::reduce(&input, &target, output.as_deref(), map.as_deref()),
        Command::Oracle { instance, limits, output } => commands::solve(&SolveArgs {
            instance,
            algorithm: Algorithm::Oracle,
            config: SolveConfig {
                limits: commands::oracle_limits(limits.max_nodes, limits.time_budget)?,
                ..SolveConfig::default()
            },
            output,
        }),
        Command::Audit {
            corpus,
            rounding,
            limits,
        } => commands::audit(&corpus, &config(&rounding, &limits, None)?),
        Command::LpDump { instance, reps } => commands::lp_dump(&instance, &reps),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
