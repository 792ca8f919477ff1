use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use pev_bottleneck_cli::{run_scenario, ScenarioConfig};

/// Optimal electricity-discount incentives for a bottleneck commute with PEV
/// charging: solves each budget of a scenario and writes CSV series.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    /// Scenario file (TOML).
    config: PathBuf,
    /// Output directory; overrides `output_dir`.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Simulation step in minutes; overrides `grid_dt`.
    #[arg(long)]
    grid_dt: Option<f64>,
    /// Seed of the best-response oracle; overrides `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Verify every budget with agent-based best response.
    #[arg(long)]
    with_oracle: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    let result = ScenarioConfig::load(&args.config).and_then(|mut cfg| {
        if let Some(dir) = args.out_dir {
            cfg.output_dir = dir;
        }
        if let Some(dt) = args.grid_dt {
            cfg.grid_dt = dt;
        }
        if let Some(seed) = args.seed {
            cfg.seed = seed;
        }
        run_scenario(&cfg, args.with_oracle)
    });
    match result {
        Ok(summary) => {
            for f in &summary.files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
