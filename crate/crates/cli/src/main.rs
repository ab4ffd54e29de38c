//! Command-line front end: one subcommand per pipeline stage plus `all`
//! and `verify`. Every flag can also come from a `DESSIN_`-prefixed
//! environment variable. Exit codes: 0 on success, 2 when verification
//! finds a failing check, 3 when a working directory holds checkpoints
//! from a different configuration.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use dessin_homology::gf2::DEFAULT_DENSE_CAP_BITS;
use dessin_homology_cli::pipeline::{
    self, validate_stage_prefix, CheckpointMismatch, PipelineConfig, Stage, STAGES,
};

#[derive(Parser)]
#[command(
    name = "dessin-homology",
    version,
    about = "Betti numbers of level covers of moduli of one-pointed curves"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Genus of the surfaces
    #[arg(long, env = "DESSIN_GENUS")]
    genus: usize,
    /// Level-structure modulus (default: 2 for genus 1, otherwise 3)
    #[arg(long, env = "DESSIN_MODULUS")]
    modulus: Option<u8>,
    /// Master seed behind every randomized certificate
    #[arg(long, env = "DESSIN_SEED", default_value_t = 0)]
    seed: u64,
    /// Directory holding artifacts and checkpoints
    #[arg(long, env = "DESSIN_WORKDIR", default_value = "dessin-work")]
    workdir: PathBuf,
    /// Worker threads (default: one per core)
    #[arg(long, env = "DESSIN_THREADS")]
    threads: Option<usize>,
    /// Largest rows×cols bit count the dense rank oracle may attempt
    #[arg(long, env = "DESSIN_DENSE_CAP", default_value_t = DEFAULT_DENSE_CAP_BITS)]
    dense_cap: u64,
    /// Confirm runs beyond the validated genus ≤ 2 range
    #[arg(long, env = "DESSIN_ALLOW_LARGE")]
    allow_large: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate gluing schemes; writes schemes.csv
    Schemes(Common),
    /// Count symplectic-basis orbits per scheme; writes bases.csv
    Bases(Common),
    /// Build the dual cell complex; writes cells.csv and boundary matrices
    Complex(Common),
    /// Rank every boundary matrix; writes ranks.json with certificates
    Rank(Common),
    /// Derive Betti numbers and the Euler characteristic
    Betti(Common),
    /// Run every stage, or a prefix of them
    All {
        #[command(flatten)]
        common: Common,
        /// Comma-separated stage prefix, e.g. `schemes,bases`
        #[arg(long, env = "DESSIN_STAGES", value_delimiter = ',')]
        stages: Option<Vec<Stage>>,
    },
    /// Cross-check existing artifacts without recomputing them
    Verify(Common),
}

fn config_for(common: &Common, stages: Vec<Stage>) -> PipelineConfig {
    PipelineConfig {
        genus: common.genus,
        modulus: common
            .modulus
            .unwrap_or_else(|| PipelineConfig::default_modulus(common.genus)),
        seed: common.seed,
        workdir: common.workdir.clone(),
        dense_cap: common.dense_cap,
        stages,
    }
}

fn init_threads(common: &Common) -> Result<()> {
    if let Some(threads) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the worker thread pool")?;
    }
    Ok(())
}

fn run_stages(common: &Common, stages: Vec<Stage>) -> Result<ExitCode> {
    init_threads(common)?;
    let config = config_for(common, stages);
    let reports = pipeline::run(&config, common.allow_large)?;
    for report in &reports {
        if report.skipped {
            println!("stage {}: already complete", report.stage);
        } else {
            println!("stage {}: done in {:.1}s", report.stage, report.seconds);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn execute(command: Command) -> Result<ExitCode> {
    match command {
        Command::Schemes(c) => run_stages(&c, Stage::Schemes.prefix().to_vec()),
        Command::Bases(c) => run_stages(&c, Stage::Bases.prefix().to_vec()),
        Command::Complex(c) => run_stages(&c, Stage::Complex.prefix().to_vec()),
        Command::Rank(c) => run_stages(&c, Stage::Rank.prefix().to_vec()),
        Command::Betti(c) => run_stages(&c, Stage::Betti.prefix().to_vec()),
        Command::All { common, stages } => {
            let stages = match stages {
                Some(list) => validate_stage_prefix(&list)?.to_vec(),
                None => STAGES.to_vec(),
            };
            run_stages(&common, stages)
        }
        Command::Verify(common) => {
            init_threads(&common)?;
            let config = config_for(&common, STAGES.to_vec());
            let report = pipeline::verify(&config)?;
            for check in &report.checks {
                if check.ok {
                    println!("check {}: ok ({})", check.name, check.detail);
                } else {
                    println!("check {}: FAIL ({})", check.name, check.detail);
                }
            }
            Ok(if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => code,
        Err(error) => {
            eprintln!("error: {error:#}");
            if error.downcast_ref::<CheckpointMismatch>().is_some() {
                ExitCode::from(3)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
