use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use perclap::config::{read_config, Task};
use perclap::runner::{exit_code, run};
use perclap::Error;

/// Percolation Laplacian spectra, IDS and tail fits.
#[derive(Debug, Parser)]
#[command(name = "perclap", version)]
struct Cli {
    /// ids, verify, tails, decay or all
    task: String,
    /// JSON experiment config
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (results do not depend on this)
    #[arg(long)]
    threads: Option<usize>,
    /// Dump every sampled graph as JSON
    #[arg(long)]
    emit_graph: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(dir) => {
            println!("results written to {}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("perclap: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}

fn execute(cli: Cli) -> perclap::Result<PathBuf> {
    let task: Task = cli.task.parse()?;
    let mut config = read_config(&cli.config)?;
    config.task = task;
    config.emit_graph |= cli.emit_graph;
    if let Some(out) = cli.out {
        config.out_dir = Some(out);
    }
    if config.out_dir.is_none() {
        config.out_dir = Some(PathBuf::from("perclap-out"));
    }
    config.validate()?;
    set_threads(cli.threads)?;
    Ok(run(&config)?.out_dir)
}

#[cfg(feature = "parallel")]
fn set_threads(threads: Option<usize>) -> perclap::Result<()> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(Error::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn set_threads(threads: Option<usize>) -> perclap::Result<()> {
    if threads == Some(0) {
        return Err(Error::Config("--threads must be positive".into()));
    }
    Ok(())
}
