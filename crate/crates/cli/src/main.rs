//! Batch entry point: estimate curves, run Monte Carlo experiments, and
//! emit plot-ready CSV.
//!
//! Identical invocations (flags, config and seed) produce byte-identical
//! output files. Exit status: 0 on success, 2 on configuration problems,
//! 3 on numeric failures; errors print a one-line JSON diagnostic on
//! stderr.

mod commands;
mod config;
mod output;

use clap::Parser;
use momdens::Error;

fn main() {
    let cli = config::Cli::parse();
    if let Err(err) = commands::run(cli) {
        let kind = match &err {
            Error::Domain(_) => "domain",
            Error::Config(_) => "configuration",
            Error::State(_) => "state",
            Error::Degenerate(_) => "degenerate",
            Error::Numeric(_) => "numeric",
        };
        let code = if matches!(err, Error::Numeric(_)) {
            3
        } else {
            2
        };
        eprintln!(
            "{}",
            serde_json::json!({ "error": kind, "message": err.to_string() })
        );
        std::process::exit(code);
    }
}
