//! `quasiloc`: runs verification suites on scenario configs.

mod config;
mod output;
mod suites;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use rayon::prelude::*;

use config::ScenarioConfig;
use suites::{is_suite, run_suite, Prepared, SuiteOutput, SUITES};

#[derive(Parser)]
#[command(name = "quasiloc", version, about = "Quasi-local regularization and gluing checks on meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the suites selected by a scenario config.
    Run {
        /// Config file, or the name of a bundled config.
        config: String,
        /// Run only these suites (repeatable); overrides the config.
        #[arg(long = "suite")]
        suites: Vec<String>,
        /// Report directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Highest order in ħ, a multiple of 1/2.
        #[arg(long)]
        max_order: Option<f64>,
        /// Seed for randomized trials.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; 0 uses all cores.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// List the available suites.
    ListSuites,
    /// List the bundled configs.
    ListConfigs,
}

/// Configuration and validation errors exit with 2, failed identities with 1.
enum Failure {
    Schema(anyhow::Error),
    Numerical(anyhow::Error),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::ListSuites => {
            for s in &SUITES {
                println!("{:<22} {}", s.name, s.description);
            }
            Ok(())
        }
        Command::ListConfigs => {
            for (name, _) in config::BUNDLED {
                println!("{name}");
            }
            Ok(())
        }
        Command::Run { config, suites, out_dir, max_order, seed, jobs } => {
            run(&config, suites, out_dir, max_order, seed, jobs)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Schema(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("{e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(
    source: &str,
    suite_args: Vec<String>,
    out_dir: Option<PathBuf>,
    max_order: Option<f64>,
    seed: Option<u64>,
    jobs: usize,
) -> Result<(), Failure> {
    let config = ScenarioConfig::load(source).map_err(Failure::Schema)?;
    let selected: Vec<String> = if !suite_args.is_empty() {
        suite_args
    } else if let Some(s) = &config.suites {
        s.clone()
    } else {
        SUITES.iter().map(|s| s.name.to_string()).collect()
    };
    if let Some(bad) = selected.iter().find(|s| !is_suite(s)) {
        return Err(Failure::Schema(anyhow::anyhow!("unknown suite {bad:?}; see `quasiloc list-suites`")));
    }
    // Keep the registry order so reports do not depend on flag order.
    let selected: Vec<&str> = SUITES.iter().map(|s| s.name).filter(|n| selected.iter().any(|s| s == n)).collect();
    let max_half_order = match max_order {
        Some(m) => config::half_order(m),
        None => config.max_half_order(),
    }
    .map_err(Failure::Schema)?;
    let seed = seed.unwrap_or(config.seed);
    let out_dir = out_dir
        .or_else(|| config.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("quasiloc-out").join(&config.label));
    let prepared = Prepared::new(config, max_half_order, seed).map_err(Failure::Schema)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .context("cannot start worker threads")
        .map_err(Failure::Schema)?;
    let results: Vec<(&str, anyhow::Result<SuiteOutput>)> =
        pool.install(|| selected.par_iter().map(|&name| (name, run_suite(name, &prepared))).collect());

    let mut outputs = Vec::new();
    let mut errors = Vec::new();
    for (name, result) in results {
        match result {
            Ok(out) => outputs.push((name, out)),
            Err(e) => errors.push(format!("suite {name} failed to run: {e:#}")),
        }
    }
    let summary = output::write_reports(&out_dir, &prepared, &outputs)
        .with_context(|| format!("cannot write reports to {}", out_dir.display()))
        .map_err(Failure::Schema)?;
    print!("{}", summary.text);
    println!("reports written to {}", out_dir.display());

    let mut failures = errors;
    for (name, out) in &outputs {
        for r in out.records.iter().filter(|r| !r.passed) {
            failures.push(format!(
                "FAIL {name}: {} on {} (residual {:e} > tolerance {:e})",
                r.identity, r.mesh_id, r.max_residual, r.tolerance
            ));
        }
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Numerical(anyhow::anyhow!(failures.join("\n"))))
    }
}
