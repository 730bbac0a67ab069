use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use loja_lab_cli::{run_many, threads_from_env, Command};

/// Constrained gradient-flow laboratory: config-driven flows, chart checks,
/// exponent fits and counterexample sweeps on 1-D Dirichlet grids and
/// truncated sequence spaces.
#[derive(Parser)]
#[command(name = "loja-lab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (JSON); may be given several times. With several
    /// configs each run writes into `<out>/<config stem>/`.
    #[arg(long = "config", required = true)]
    config: Vec<PathBuf>,

    /// Output directory; defaults to output.dir from the config.
    #[arg(long = "out")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Sub {
    /// Integrate the projected gradient flow and write trace.csv.
    Flow(RunArgs),
    /// Fit the Lojasiewicz exponent and constant around a polished critical
    /// point and write fit.jsonl.
    LojaFit(RunArgs),
    /// Sweep the best constants against truncation dimension (sweep.csv).
    Counterexample(RunArgs),
    /// Verify the constraint chart: tangent identities, graph derivative,
    /// norm comparison, Hessian spectrum (chartcheck.jsonl).
    ChartCheck(RunArgs),
    /// Randomized exact-derivative suites for the configured model
    /// (gradcheck.jsonl).
    GradCheck(RunArgs),
}

fn out_dir(args: &RunArgs) -> PathBuf {
    if let Some(out) = &args.out {
        return out.clone();
    }
    // Fall back to output.dir of the first config that parses.
    for path in &args.config {
        if let Ok(raw) = std::fs::read_to_string(path) {
            if let Ok(cfg) = loja_lab_cli::config::ExperimentConfig::from_json(&raw) {
                return PathBuf::from(cfg.output.dir);
            }
        }
    }
    PathBuf::from("out")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match &cli.command {
        Sub::Flow(a) => (Command::Flow, a),
        Sub::LojaFit(a) => (Command::LojaFit, a),
        Sub::Counterexample(a) => (Command::Counterexample, a),
        Sub::ChartCheck(a) => (Command::ChartCheck, a),
        Sub::GradCheck(a) => (Command::GradCheck, a),
    };
    let out = out_dir(args);
    let code = run_many(command, &args.config, &out, threads_from_env());
    ExitCode::from(code.clamp(0, 255) as u8)
}
