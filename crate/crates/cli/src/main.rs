mod config;
mod experiments;
mod output;

use std::fs;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{validate, Experiment, ExperimentConfig, Report};

const EXIT_INVALID: u8 = 1;
const EXIT_RUNTIME: u8 = 2;

/// Reproducible crest-factor experiments for BPSK-coded OFDM.
#[derive(Debug, Parser)]
#[command(name = "ofdm-cf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an experiment and write its CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output path; overrides `output` in the config. Defaults to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads. Affects speed only, never output.
        #[arg(long)]
        threads: Option<NonZeroUsize>,
    },
    /// Check a config and list every problem without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// List the available experiments and their CSV columns.
    ListExperiments,
}

#[derive(Debug, thiserror::Error)]
enum Failure {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Self::Invalid(_) => EXIT_INVALID,
            Self::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out, threads } => run(&config, out.as_deref(), threads),
        Command::Validate { config } => check(&config),
        Command::ListExperiments => {
            for e in Experiment::ALL {
                println!("{:<16}{}", e.name(), e.summary());
                println!("{:<16}columns: {}", "", e.columns().join(", "));
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.code())
        }
    }
}

fn load(path: &Path) -> Result<ExperimentConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
    ExperimentConfig::parse(&text).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

fn base_dir(path: &Path) -> &Path {
    path.parent().unwrap_or(Path::new("."))
}

fn print_issues(path: &Path, report: &Report) {
    for issue in &report.issues {
        eprintln!("{}: {issue}", path.display());
    }
}

fn check(path: &Path) -> Result<(), Failure> {
    let cfg = load(path)?;
    let (report, _) = validate(&cfg, base_dir(path));
    print_issues(path, &report);
    if report.has_errors() {
        return Err(Failure::Invalid(format!("{}: invalid config", path.display())));
    }
    println!("{}: ok ({} experiment)", path.display(), cfg.experiment);
    Ok(())
}

fn run(path: &Path, out: Option<&Path>, threads: Option<NonZeroUsize>) -> Result<(), Failure> {
    let cfg = load(path)?;
    let (report, plan) = validate(&cfg, base_dir(path));
    print_issues(path, &report);
    let Some(plan) = plan else {
        return Err(Failure::Invalid(format!("{}: invalid config", path.display())));
    };

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        pool = pool.num_threads(t.get());
    }
    let pool = pool
        .build()
        .map_err(|e| Failure::Runtime(format!("thread pool: {e}")))?;
    let columns = cfg.experiment.columns();
    let table = pool
        .install(|| experiments::run(&plan, columns))
        .map_err(|e| Failure::Runtime(format!("{} experiment failed: {e}", cfg.experiment)))?;
    let csv = output::render(&cfg, &table);

    let target = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.output.as_ref().map(|p| base_dir(path).join(p)));
    match target {
        Some(p) => fs::write(&p, csv).map_err(|e| Failure::Runtime(format!("{}: {e}", p.display()))),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}
