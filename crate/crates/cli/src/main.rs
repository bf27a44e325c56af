mod commands;
mod config;
mod error;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Ctx, Games, RsmArgs, Run, WeightMethod};
use config::Loaded;
use error::CliResult;

/// Host-city evaluation: weighting, forecasting, screening and sensitivity.
#[derive(Debug, Parser)]
#[command(name = "hoiem", version)]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true, env = "HOIEM_CONFIG")]
    config: Option<PathBuf>,

    /// Output directory; overrides `out_dir` in the config.
    #[arg(long, global = true, env = "HOIEM_OUT_DIR")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Subjective, objective or combined indicator weights.
    Weights {
        #[arg(long, value_enum, default_value = "combined")]
        method: WeightMethod,
    },
    /// Select the feature group and score every alternative.
    Evaluate {
        /// Number of features; overrides `weights.features`/`weights.coverage`.
        #[arg(long)]
        features: Option<usize>,
    },
    /// GM(1,1) forecast of an indicator or climate series.
    Forecast {
        /// Indicator id (`A1`) or `feb_temp` / `feb_snow`.
        #[arg(long)]
        indicator: String,
        #[arg(long)]
        until: Option<i32>,
        #[arg(long)]
        city: Option<String>,
        #[arg(long)]
        pool: Option<PathBuf>,
    },
    /// Winter climate screen or summer medal screen, with suitability ranking.
    Screen {
        #[arg(value_enum)]
        games: Games,
        #[arg(long)]
        pool: Option<PathBuf>,
    },
    /// Aggregate impact of each scheme over the feature group.
    CompareSchemes {
        #[arg(long)]
        plans: Option<PathBuf>,
    },
    /// Random feature-substitution study.
    Sensitivity {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        swaps: Option<usize>,
    },
    /// Box-Behnken response surface of χ over feature weights.
    Rsm {
        /// Comma-separated factors, e.g. `ξ1,ξ10` or `A5,D5`.
        #[arg(long, value_delimiter = ',')]
        factors: Option<Vec<String>>,
        /// Grid points per axis in the plot-data file.
        #[arg(long)]
        grid: Option<usize>,
        /// Relative weight perturbation at coded level ±1.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        alternative: Option<String>,
    },
}

fn out_dir(cli_out: Option<&Path>, loaded: &Loaded) -> PathBuf {
    match (cli_out, &loaded.config.out_dir) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(p)) => loaded.resolve(p),
        (None, None) => PathBuf::from("hoiem-out"),
    }
}

fn dispatch(ctx: &Ctx, command: &Command) -> CliResult<Run> {
    match command {
        Command::Weights { method } => commands::weights(ctx, *method),
        Command::Evaluate { features } => commands::evaluate(ctx, *features),
        Command::Forecast {
            indicator,
            until,
            city,
            pool,
        } => commands::forecast(ctx, indicator, *until, city.as_deref(), pool.as_deref()),
        Command::Screen { games, pool } => commands::screen(ctx, *games, pool.as_deref()),
        Command::CompareSchemes { plans } => commands::compare(ctx, plans.as_deref()),
        Command::Sensitivity { seed, trials, swaps } => commands::sensitivity(ctx, *seed, *trials, *swaps),
        Command::Rsm {
            factors,
            grid,
            delta,
            alternative,
        } => commands::rsm(
            ctx,
            RsmArgs {
                factors: factors.as_deref(),
                grid: *grid,
                delta: *delta,
                alternative: alternative.as_deref(),
            },
        ),
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| error::CliError::Config("no --config given and HOIEM_CONFIG is not set".into()))?;
    let loaded = Loaded::from_path(path)?;
    let run = dispatch(&Ctx { loaded: &loaded }, &cli.command)?;
    let dir = out_dir(cli.out.as_deref(), &loaded).join(run.dir);
    let header = format!("# {}", run.outputs.provenance().command);
    let written = run.outputs.commit(&dir)?;
    println!("{header}");
    for line in &run.summary {
        println!("{line}");
    }
    println!("wrote {} files to {}", written.len(), dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
