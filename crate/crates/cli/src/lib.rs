//! Library surface of the experiment runner: config parsing/validation and
//! the command implementations, kept callable for integration tests.

pub mod commands;
pub mod config;
pub mod svg;

use std::path::{Path, PathBuf};

use commands::{cmd_chart_check, cmd_counterexample, cmd_flow, cmd_grad_check, cmd_loja_fit};
use config::ExperimentConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Flow,
    LojaFit,
    Counterexample,
    ChartCheck,
    GradCheck,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Flow => "flow",
            Command::LojaFit => "loja-fit",
            Command::Counterexample => "counterexample",
            Command::ChartCheck => "chart-check",
            Command::GradCheck => "grad-check",
        }
    }
}

/// Run one command against one already-loaded config document.
pub fn run_command(command: Command, raw_config: &str, out: &Path) -> i32 {
    let config = match ExperimentConfig::from_json(raw_config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return commands::EXIT_CONFIG;
        }
    };
    match command {
        Command::Flow => cmd_flow(&config, raw_config, out),
        Command::LojaFit => cmd_loja_fit(&config, raw_config, out),
        Command::Counterexample => cmd_counterexample(&config, raw_config, out),
        Command::ChartCheck => cmd_chart_check(&config, raw_config, out),
        Command::GradCheck => cmd_grad_check(&config, raw_config, out),
    }
}

/// Run one command for several config files, up to `threads` in parallel
/// (the `LOJA_LAB_THREADS` cap). With several configs each run writes into
/// `out_base/<config file stem>/`; with one config `out_base` is used
/// directly. Returns the worst exit code.
pub fn run_many(command: Command, configs: &[PathBuf], out_base: &Path, threads: usize) -> i32 {
    let jobs: Vec<(PathBuf, PathBuf)> = configs
        .iter()
        .map(|path| {
            let out = if configs.len() == 1 {
                out_base.to_path_buf()
            } else {
                let stem = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "config".into());
                out_base.join(stem)
            };
            (path.clone(), out)
        })
        .collect();

    let threads = threads.max(1);
    let mut worst = 0;
    for chunk in jobs.chunks(threads) {
        let codes: Vec<i32> = std::thread::scope(|scope| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|(path, out)| {
                    scope.spawn(move || match std::fs::read_to_string(path) {
                        Ok(raw) => run_command(command, &raw, out),
                        Err(e) => {
                            eprintln!("cannot read config {}: {e}", path.display());
                            commands::EXIT_CONFIG
                        }
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        worst = worst.max(codes.into_iter().max().unwrap_or(0));
    }
    worst
}

/// Parallelism cap from the environment (default 1).
pub fn threads_from_env() -> usize {
    std::env::var("LOJA_LAB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(1)
}
