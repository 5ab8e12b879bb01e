use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use fysolve_cli::{load_config, run, RunOptions, Task, EXIT_CONFIG, EXIT_IO};

/// Few-body bound states, phase shifts and partition-chain counts.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    task: Task,
    /// Run file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Directory for result files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads; results are reproducible for a fixed count.
    #[arg(long, env = "FYSOLVE_WORKERS")]
    workers: Option<usize>,
    /// Write tree diagrams of the chain classes to this file.
    #[arg(long)]
    dot: Option<PathBuf>,
    /// List every chain class in the record.
    #[arg(long)]
    classes: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match load_config(&cli.config).and_then(|c| c.require(cli.task).map(|_| c)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", cli.config.display());
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    if let Some(k) = cli.workers {
        if k == 0 {
            eprintln!("error: --workers must be at least 1");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
        {
            eprintln!("error: cannot start {k} workers: {e}");
            return ExitCode::from(EXIT_IO as u8);
        }
    }
    let opts = RunOptions {
        out_dir: cli.out,
        dot: cli.dot,
        classes: cli.classes,
    };
    let outcome = run(&config, cli.task, &opts);
    match &outcome.record.error {
        Some(e) => eprintln!("error: {}", e.message),
        None => println!("{}", outcome.json_path.display()),
    }
    ExitCode::from(outcome.exit_code as u8)
}
