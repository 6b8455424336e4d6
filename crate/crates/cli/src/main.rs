mod args;
mod commands;
mod error;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{load_config, Cli, Command};
use commands::RunContext;
use error::{usage, CliError};

fn merged<T>(flags: T, config: Option<&std::path::Path>, merge: fn(T, T) -> T) -> Result<T, CliError>
where
    T: for<'de> serde::Deserialize<'de>,
{
    match config {
        Some(path) => Ok(merge(flags, load_config(path)?)),
        None => Ok(flags),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(workers) = cli.workers {
        if workers == 0 {
            return Err(usage("--workers must be >= 1"));
        }
        pool = pool.num_threads(workers);
    }
    let pool = pool.build().map_err(|e| usage(format!("--workers: {e}")))?;
    let ctx = RunContext { workers: pool.current_num_threads() };
    let config = cli.config.as_deref();

    pool.install(|| match cli.command {
        Command::Correlation(a) => commands::correlation(merged(a, config, args::CorrelationArgs::merged_over)?, &ctx),
        Command::Chsh(a) => commands::chsh(merged(a, config, args::ChshArgs::merged_over)?, &ctx),
        Command::Sweep(a) => commands::sweep(merged(a, config, args::SweepArgs::merged_over)?, &ctx),
        Command::Deviation(a) => commands::deviation(merged(a, config, args::DeviationArgs::merged_over)?, &ctx),
        Command::Background(a) => commands::background(merged(a, config, args::BackgroundArgs::merged_over)?),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
