use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use cabin_mwf_scenario::config::ExperimentKind;
use cabin_mwf_scenario::{emit_report, run_experiment, ScenarioConfig};

#[derive(Parser)]
#[command(
    name = "cabin-mwf",
    version,
    about = "In-car two-microphone Wiener filter experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        config: PathBuf,
        /// Output directory (overrides `output_dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        experiment: Option<Experiment>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Experiment {
    Notch,
    Noise,
    Head,
}

fn main() -> ExitCode {
    let Command::Run {
        config,
        out,
        seed,
        experiment,
    } = Cli::parse().command;
    let mut cfg = match ScenarioConfig::load(&config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(x) = experiment {
        cfg.experiment = match x {
            Experiment::Notch => ExperimentKind::Notch,
            Experiment::Noise => ExperimentKind::Noise,
            Experiment::Head => ExperimentKind::Head,
        };
    }
    let dir = out
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(cfg.experiment.as_str()));
    let started = Instant::now();
    let report = match run_experiment(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    let wall = started.elapsed().as_secs_f64();
    if let Err(e) = emit_report(&report, &dir, Some(wall)) {
        eprintln!("error: {e}");
        return ExitCode::FAILURE;
    }
    print!("{}", report.metrics_csv());
    eprintln!(
        "{} rows written to {} in {wall:.1} s (config {})",
        report.rows.len(),
        dir.display(),
        &report.config_hash[..12]
    );
    let failed = report.failed_rows();
    if failed > 0 {
        eprintln!("{failed} of {} rows failed", report.rows.len());
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}
