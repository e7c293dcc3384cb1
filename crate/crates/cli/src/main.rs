use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use dlab_cli::{parse_config, run, RunError};

/// Simulations, ground states and stability experiments for coupled
/// short-wave/long-wave systems.
#[derive(Parser)]
#[command(name = "dlab", version)]
struct Cli {
    /// JSON run configuration.
    config: PathBuf,
    /// Output directory (default: the config's `output`, else `dlab-out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps (default: $DLAB_THREADS, else all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn threads_from_env() -> Result<Option<usize>, RunError> {
    match std::env::var("DLAB_THREADS") {
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&k| k > 0)
            .map(Some)
            .ok_or_else(|| RunError::Config(format!("DLAB_THREADS must be a positive integer, got {s:?}"))),
        Err(_) => Ok(None),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = (|| {
        let text = std::fs::read_to_string(&cli.config)
            .map_err(|e| RunError::Config(format!("cannot read {}: {e}", cli.config.display())))?;
        let cfg = parse_config(&text).map_err(|e| RunError::Config(e.to_string()))?;
        let threads = match cli.threads {
            Some(0) => return Err(RunError::Config("--threads must be positive".into())),
            Some(k) => Some(k),
            None => threads_from_env()?,
        };
        let out = cli
            .out
            .clone()
            .or_else(|| cfg.output.clone())
            .unwrap_or_else(|| PathBuf::from("dlab-out"));
        run(&cfg, &out, threads)
    })();
    match result {
        Ok(summary) => {
            println!("{}", summary.manifest);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
