//! `fredholm`: command-line front end for the regularization experiments.
//!
//! Exit codes: 0 on success, 2 when the configuration is rejected (no files
//! are written), 3 when the computation itself fails, 1 for I/O errors.

mod args;
mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;
use crate::config::RunConfig;

const EXIT_IO: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match RunConfig::from_cli(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cfg.threads {
        pool = pool.num_threads(t);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return ExitCode::from(EXIT_IO);
        }
    };
    let outputs = match pool.install(|| commands::run(&cfg.settings)) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: numerical failure: {e}");
            return ExitCode::from(EXIT_NUMERICAL);
        }
    };
    if let Err(e) = outputs.write(&cfg.out) {
        eprintln!("error: cannot write to {}: {e}", cfg.out.display());
        return ExitCode::from(EXIT_IO);
    }
    match serde_json::to_string_pretty(&outputs.summary) {
        Ok(s) => println!("{s}"),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_IO);
        }
    }
    ExitCode::SUCCESS
}
