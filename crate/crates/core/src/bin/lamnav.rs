//! Command-line front end: parses flags, loads the experiment config, runs
//! the requested experiment, prints a one-line summary per record, and exits
//! 0 exactly when every check passes.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lamnav::cli::{run, Experiment, ExperimentConfig};

#[derive(Parser)]
#[command(name = "lamnav", version, about = "Lamé–Navier system toolkit")]
struct Args {
    /// Experiment configuration file (TOML, or JSON as fallback).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random draw in the experiment.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Directory for the JSON report and CSV tables.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Also print the full JSON report to stdout.
    #[arg(long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the exact-arithmetic Clifford algebra axioms.
    VerifyAlgebra,
    /// Check the operator identities that hold exactly on polynomial fields.
    VerifyIdentities,
    /// Check the kernel differential identities by finite differences.
    VerifyKernels,
    /// Build boundary and volume quadrature rules and check their measures.
    Mesh,
    /// Check the Teodorescu transforms against their inverse operators.
    Transform,
    /// Check the boundary/volume reconstruction inside and outside the domain.
    BorelPompeiu,
    /// Solve the smooth-boundary transmission problem and verify its jumps.
    SolveJump,
    /// Solve the fractal-boundary transmission problem and verify its jumps.
    FractalDemo,
    /// Estimate the box-counting dimension of a boundary cloud.
    EstimateDsummability,
    /// Estimate the distance-integrability exponents of a smooth boundary.
    EstimateMarcinkiewicz,
}

impl Command {
    fn experiment(&self) -> Experiment {
        match self {
            Command::VerifyAlgebra => Experiment::VerifyAlgebra,
            Command::VerifyIdentities => Experiment::VerifyIdentities,
            Command::VerifyKernels => Experiment::VerifyKernels,
            Command::Mesh => Experiment::Mesh,
            Command::Transform => Experiment::Transform,
            Command::BorelPompeiu => Experiment::BorelPompeiu,
            Command::SolveJump => Experiment::SolveJump,
            Command::FractalDemo => Experiment::FractalDemo,
            Command::EstimateDsummability => Experiment::EstimateDSummability,
            Command::EstimateMarcinkiewicz => Experiment::EstimateMarcinkiewicz,
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.threads > 0 {
        if let Err(e) =
            rayon::ThreadPoolBuilder::new().num_threads(args.threads).build_global()
        {
            eprintln!("lamnav: cannot configure {} threads: {e}", args.threads);
            return ExitCode::FAILURE;
        }
    }
    let config = match &args.config {
        Some(path) => match ExperimentConfig::from_path(path) {
            Ok(cfg) => cfg,
            Err(e) => {
                eprintln!("lamnav: {e}");
                return ExitCode::FAILURE;
            }
        },
        None => ExperimentConfig::default(),
    };
    let experiment = args.command.experiment();
    match run(experiment, &config, args.seed, args.out.as_deref()) {
        Ok(report) => {
            for r in &report.records {
                println!(
                    "[{}] {} :: {} = {:.3e} (tol {:.3e})",
                    if r.pass { "PASS" } else { "FAIL" },
                    r.anchor,
                    r.name,
                    r.value,
                    r.tolerance
                );
            }
            if args.verbose {
                println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            }
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("lamnav: {e}");
            ExitCode::FAILURE
        }
    }
}
