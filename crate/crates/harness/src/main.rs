use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use cerlab::ModelParams;
use cerlab_harness::{run, ExperimentConfig, ExperimentKind, HarnessError};
use clap::Parser;

/// Experiments on correlated Erdős–Rényi graph pairs.
///
/// Without --config, each subcommand runs a small built-in preset. Exit codes: 0 on
/// success, 2 when a statistical check fails, 3 on a config error, 1 otherwise.
#[derive(Debug, Parser)]
#[command(name = "cerlab", version)]
struct Cli {
    #[arg(value_enum)]
    command: ExperimentKind,
    /// JSON experiment config; its `experiment` field must match the subcommand.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (defaults to all cores).
    #[arg(long, env = "CERLAB_THREADS")]
    threads: Option<usize>,
    /// Output file, overriding the config; stdout when neither is set.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the effective config as JSON and exit.
    #[arg(long)]
    print_config: bool,
}

/// Built-in preset for a subcommand.
fn preset(kind: ExperimentKind) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(kind, 1, 0);
    match kind {
        ExperimentKind::Sample => c.model = Some(ModelParams { n: 10, p: 0.3, s: 0.8 }),
        ExperimentKind::Orbits => {
            c.model = Some(ModelParams { n: 12, p: 0.3, s: 0.8 });
            c.replicates = 3;
        }
        ExperimentKind::MomentsCheck => {
            c.k_grid = Some(vec![1, 2, 3, 4, 6]);
            c.p_grid = Some(vec![0.25, 0.4]);
            c.s_grid = Some(vec![0.5, 0.8]);
            c.theta_grid = Some(vec![0.5, 1.2]);
            c.replicates = 100_000;
        }
        ExperimentKind::Density | ExperimentKind::RhoCurve => {
            c.lambda_grid = Some(vec![1.0, 1.5, 2.0, 4.0, 8.0]);
            c.n_grid = Some(vec![500]);
            c.replicates = 10;
            c.alpha = Some(0.5);
        }
        ExperimentKind::Estimate => {
            c.model = Some(ModelParams { n: 8, p: 0.5, s: 0.9 });
            c.replicates = 10;
        }
        ExperimentKind::Posterior => {
            c.model = Some(ModelParams { n: 5, p: 0.4, s: 0.8 });
            c.replicates = 20;
        }
        ExperimentKind::Tv => {
            c.model = Some(ModelParams { n: 4, p: 0.5, s: 0.8 });
            c.replicates = 20_000;
        }
        ExperimentKind::Admissibility => {
            c.alpha = Some(0.5);
            c.lambda_grid = Some(vec![2.0]);
            c.n_grid = Some(vec![500]);
            c.replicates = 10;
        }
        ExperimentKind::ThresholdSweep => {
            c.alpha = Some(0.5);
            c.n_grid = Some(vec![300]);
            c.sweep_points = Some(5);
            c.replicates = 10;
        }
    }
    c
}

fn configure(cli: &Cli) -> Result<ExperimentConfig, HarnessError> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => preset(cli.command),
    };
    if config.experiment != cli.command {
        return Err(HarnessError::Config(format!(
            "config is for {}, not {}",
            config.experiment.as_str(),
            cli.command.as_str()
        )));
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.output = Some(out.clone());
    }
    config.validate()?;
    Ok(config)
}

fn execute(cli: &Cli) -> Result<(), HarnessError> {
    let config = configure(cli)?;
    if cli.print_config {
        println!("{}", config.to_json());
        return Ok(());
    }
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(HarnessError::Config("--threads must be ≥ 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
    }
    let output = run(&config)?;
    match &config.output {
        Some(path) => std::fs::write(path, &output.body)?,
        None => std::io::stdout().write_all(output.body.as_bytes())?,
    }
    for line in &output.summary {
        eprintln!("{line}");
    }
    match output.failed_check {
        Some(msg) => Err(HarnessError::Statistical(msg)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
