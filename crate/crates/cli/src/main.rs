//! `rydsim` command-line front-end: runs one scenario config and writes
//! tables and fidelity reports.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::ScenarioConfig;
use run::{CliError, Context, Format};

#[derive(Parser, Debug)]
#[command(name = "rydsim", version, about = "Run a Rydberg gate scenario config")]
struct Args {
    /// Scenario config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, env = "RYDSIM_JOBS")]
    jobs: Option<usize>,
    /// Integrator tolerance.
    #[arg(long, default_value_t = rydsim::quantum::DEFAULT_TOL)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

fn execute(args: &Args) -> Result<Vec<PathBuf>, CliError> {
    let cfg = ScenarioConfig::load(&args.config).map_err(CliError::Config)?;
    let stem = match &cfg.name {
        Some(n) => n.clone(),
        None => args
            .config
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .ok_or_else(|| CliError::Config("config path has no file stem".into()))?,
    };
    let jobs = match args.jobs {
        Some(0) => return Err(CliError::Config("--jobs must be at least 1".into())),
        Some(j) => j,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let pool =
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build().map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let ctx = Context { out: args.out.clone(), stem, tol: args.tol, format: args.format };
    pool.install(|| run::run(&cfg, &ctx))
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("rydsim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
