//! Configuration-driven front end for the shape-sphere holonomy library.

pub mod config;
pub mod error;
pub mod output;
pub mod scenarios;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

pub use config::{Scenario, ScenarioConfig};
pub use error::{CliError, CliResult};
pub use output::RunManifest;

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "SHAPEHOLO_OUT";
pub const DEFAULT_OUT: &str = "shapeholo-out";

#[derive(Debug, Parser)]
#[command(name = "shapeholo", version, about = "Holonomy scenarios on the shape sphere of triangles")]
pub struct Cli {
    /// Output directory (overrides the config and the environment).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for parallel sweeps.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for randomized checks (overrides the config).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario and write its outputs with a manifest.
    Run { config: PathBuf },
    /// Check a config without running it or writing anything.
    Validate { config: PathBuf },
}

/// Output directory: `--out`, then the config's `output`, then the environment.
pub fn output_dir(cli_out: Option<&Path>, cfg: &ScenarioConfig) -> PathBuf {
    if let Some(p) = cli_out {
        return p.to_path_buf();
    }
    if let Some(p) = &cfg.output {
        return cfg.resolve(p);
    }
    std::env::var_os(OUT_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn configure_threads(threads: Option<usize>) -> CliResult<()> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::validation("--threads must be at least 1"));
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

pub fn run_config(path: &Path, out: Option<&Path>, seed: Option<u64>, threads: Option<usize>) -> CliResult<PathBuf> {
    let start = Instant::now();
    let cfg = ScenarioConfig::load(path)?;
    configure_threads(threads)?;
    let seed = seed.unwrap_or(cfg.seed);
    let dir = output_dir(out, &cfg);
    let compute = Instant::now();
    let staged = scenarios::run(&cfg, seed)?;
    let compute_seconds = compute.elapsed().as_secs_f64();
    for name in staged.names() {
        log::info!("writing {}", dir.join(name).display());
    }
    staged.commit(&dir, |checksums| RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        scenario: cfg.scenario.name().to_string(),
        seed,
        threads,
        config: cfg.source.clone(),
        checksums,
        timings: output::Timings {
            compute_seconds,
            total_seconds: start.elapsed().as_secs_f64(),
        },
    })?;
    Ok(dir)
}

pub fn validate_config(path: &Path) -> CliResult<Vec<String>> {
    let cfg = ScenarioConfig::load(path)?;
    scenarios::validate(&cfg)
}

/// Parses arguments, executes, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => error::EXIT_VALIDATION,
            };
        }
    };
    let result = match &cli.command {
        Command::Run { config } => run_config(config, cli.out.as_deref(), cli.seed, cli.threads).map(|dir| {
            println!("wrote {}", dir.display());
        }),
        Command::Validate { config } => validate_config(config).map(|lines| {
            for l in lines {
                println!("{l}");
            }
            println!("pass");
        }),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
