use agewire::config::{self, Experiment, Overrides};
use agewire::manifest::{self, RunManifest, MANIFEST_NAME};
use agewire_core::error::CoreError;
use agewire_core::runtime;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "agewire", version, about = "Aging-attack experiments on multiplier netlists")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file; omitted fields fall back to experiment defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the Monte Carlo iteration count.
    #[arg(long)]
    iterations: Option<usize>,
    /// Print the effective configuration and exit without running.
    #[arg(long)]
    dump_config: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Stress-duty histograms, untampered vs rewired
    StressHist(RunArgs),
    /// Normalized worst-path delay against age per configuration
    DelayVsTime(RunArgs),
    /// Delay cost of a fixed tampering fraction across widths
    BitwidthScaling(RunArgs),
    /// Delay distributions under process variation
    MonteCarlo(RunArgs),
    /// Guard-band violation fractions against age
    ErrorLikelihood(RunArgs),
    /// Rewiring vs reference trojans under one guard band
    BaselineCompare(RunArgs),
    /// Toy classifier accuracy against multiplier age
    InferenceCurve(RunArgs),
    /// Re-check the output checksums a manifest promises
    VerifyManifest {
        /// Run directory holding the outputs.
        #[arg(long)]
        dir: PathBuf,
        /// Manifest location; defaults to manifest.json inside the directory.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
}

fn error_kind(e: &CoreError) -> &'static str {
    match e {
        CoreError::Build(_) => "build",
        CoreError::Eval(_) => "eval",
        CoreError::Domain(_) => "domain",
        CoreError::Stress(_) => "stress",
        CoreError::Timing(_) => "timing",
        CoreError::Attack(_) => "attack",
        CoreError::PlanMismatch(_) => "plan_mismatch",
        CoreError::Fault(_) => "fault",
        CoreError::Inference(_) => "inference",
        CoreError::Format(_) => "format",
        CoreError::Io(_) => "io",
    }
}

fn fail(e: CoreError) -> ExitCode {
    let msg = serde_json::json!({ "error": e.to_string(), "kind": error_kind(&e) });
    eprintln!("{msg}");
    ExitCode::FAILURE
}

fn run(experiment: Experiment, args: &RunArgs) -> ExitCode {
    let overrides = Overrides {
        seed: args.seed,
        out: args.out.clone(),
        iterations: args.iterations,
    };
    let cfg = match config::load(experiment, args.config.as_deref(), &overrides) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    if args.dump_config {
        println!("{}", cfg.to_pretty_json());
        return ExitCode::SUCCESS;
    }
    match runtime::run(runtime::threads_from_env(), || agewire::run_experiment(&cfg)) {
        Err(e) => fail(e),
        Ok(summary) => {
            for f in &summary.files {
                println!("wrote {}", summary.out_dir.join(f).display());
            }
            println!(
                "{} done in {} ms (config {})",
                experiment.name(),
                summary.manifest.wall_clock_ms,
                &summary.manifest.config_hash[..12]
            );
            ExitCode::SUCCESS
        }
    }
}

fn verify(dir: &PathBuf, manifest_path: Option<&PathBuf>) -> ExitCode {
    let path = manifest_path.cloned().unwrap_or_else(|| dir.join(MANIFEST_NAME));
    let manifest = match RunManifest::load(&path) {
        Ok(m) => m,
        Err(e) => return fail(e),
    };
    let report = manifest::verify(&manifest, dir);
    for line in report.lines() {
        println!("{line}");
    }
    if report.pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::StressHist(a) => run(Experiment::StressHist, a),
        Command::DelayVsTime(a) => run(Experiment::DelayVsTime, a),
        Command::BitwidthScaling(a) => run(Experiment::BitwidthScaling, a),
        Command::MonteCarlo(a) => run(Experiment::MonteCarlo, a),
        Command::ErrorLikelihood(a) => run(Experiment::ErrorLikelihood, a),
        Command::BaselineCompare(a) => run(Experiment::BaselineCompare, a),
        Command::InferenceCurve(a) => run(Experiment::InferenceCurve, a),
        Command::VerifyManifest { dir, manifest } => verify(dir, manifest.as_ref()),
    }
}
