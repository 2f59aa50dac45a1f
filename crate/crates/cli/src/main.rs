use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use gausslearn::config::{ConfigError, ExperimentConfig, Task};
use gausslearn::run::{exit_code_for, resolve_output_dir, run_experiment, EXIT_CONFIG};

/// Learning experiments on bosonic Gaussian states.
#[derive(Debug, Parser)]
#[command(name = "gausslearn", version)]
struct Cli {
    /// JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    task: Option<Task>,
    /// Run a single seed instead of the configured list.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    /// Output directory (default: config, then $GAUSSLEARN_OUT, then ./gausslearn-out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads across seeds.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    override_l: Option<usize>,
    #[arg(long)]
    override_zeta: Option<f64>,
    #[arg(long)]
    override_eta: Option<f64>,
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = match (&cli.config, cli.task) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(task)) => ExperimentConfig::new(task),
        (None, None) => return Err(ConfigError::new("either --config or --task is required".into())),
    };
    if let Some(t) = cli.task {
        cfg.task = t;
    }
    if let Some(s) = cli.seed {
        cfg.seeds = vec![s];
    }
    cfg.eps = cli.eps.unwrap_or(cfg.eps);
    cfg.delta = cli.delta.unwrap_or(cfg.delta);
    cfg.kappa = cli.kappa.or(cfg.kappa);
    cfg.threads = cli.threads.or(cfg.threads);
    cfg.overrides.l = cli.override_l.or(cfg.overrides.l);
    cfg.overrides.zeta = cli.override_zeta.or(cfg.overrides.zeta);
    cfg.overrides.eta = cli.override_eta.or(cfg.overrides.eta);
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    let dir = resolve_output_dir(cli.out.as_deref(), &cfg);
    match run_experiment(&cfg, &dir) {
        Ok(outcome) => {
            let s = &outcome.report.summary;
            println!(
                "{}: {} runs, {} failed, {} properties failed; report in {}",
                outcome.report.task,
                s.runs,
                s.failed_runs,
                s.failed_properties,
                outcome.dir.display()
            );
            for r in outcome.report.runs.iter().filter(|r| r.error.is_some()) {
                let e = r.error.as_ref().expect("filtered on error");
                eprintln!("seed {}: {} [{}]: {}", r.seed, e.origin, e.kind, e.message);
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e) as u8)
        }
    }
}
