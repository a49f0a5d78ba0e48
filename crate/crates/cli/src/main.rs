use std::process::ExitCode;

use clap::Parser;
use lesion_cli::{run, Cli, THREADS_ENV};

fn init_threads() -> anyhow::Result<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .map_err(|_| anyhow::anyhow!("{THREADS_ENV} must be a positive integer, got `{value}`"))?;
    if threads == 0 {
        anyhow::bail!("{THREADS_ENV} must be a positive integer, got 0");
    }
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = init_threads().and_then(|()| run(&cli.command));
    match result {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            if outcome.success() {
                ExitCode::SUCCESS
            } else {
                eprintln!("finished with {} error(s)", outcome.errors);
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
