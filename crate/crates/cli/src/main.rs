use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tenfold::experiment::{self, ExperimentConfig, SeedRange, Task};
use tenfold::Error;

#[derive(Parser)]
#[command(name = "tenfold", version, about = "Desk-scale experiments on free-fermion topological phases")]
struct Cli {
    #[command(subcommand)]
    task: Command,
    /// Experiment config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides output.dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed range A..B (half-open; overrides disorder.seeds).
    #[arg(long, global = true)]
    seeds: Option<String>,
    /// Worker threads.
    #[arg(long, global = true, env = "TENFOLD_JOBS", default_value_t = 1)]
    jobs: usize,
    /// Tolerance override, e.g. gap=1e-8. Repeatable.
    #[arg(long, global = true, value_name = "KEY=VAL")]
    tolerance: Vec<String>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    VerifyClifford,
    Classify,
    BulkInvariant,
    EdgeSpectrum,
    BbCheck,
    DisorderSweep,
    HomotopySweep,
}

impl Command {
    fn task(self) -> Task {
        match self {
            Command::VerifyClifford => Task::VerifyClifford,
            Command::Classify => Task::Classify,
            Command::BulkInvariant => Task::BulkInvariant,
            Command::EdgeSpectrum => Task::EdgeSpectrum,
            Command::BbCheck => Task::BbCheck,
            Command::DisorderSweep => Task::DisorderSweep,
            Command::HomotopySweep => Task::HomotopySweep,
        }
    }
}

fn build(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    let task = cli.task.task();
    if let Some(t) = cfg.task {
        if t != task {
            return Err(Error::Config(format!("task: config says `{}`, command is `{}`", t.label(), task.label())));
        }
    }
    cfg.task = Some(task);
    if let Some(o) = &cli.out {
        cfg.output.dir = o.clone();
    }
    if let Some(s) = &cli.seeds {
        cfg.disorder.seeds = Some(s.parse::<SeedRange>()?);
    }
    for kv in &cli.tolerance {
        cfg.tolerances.set(kv)?;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = build(&cli).and_then(|cfg| experiment::run(&cfg, cli.jobs));
    match outcome {
        Ok(o) => {
            for f in &o.files {
                println!("wrote {}", f.display());
            }
            if o.passed {
                println!("PASS");
                ExitCode::SUCCESS
            } else {
                for f in &o.failures {
                    eprintln!("FAIL {f}");
                }
                ExitCode::from(1)
            }
        }
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
