//! Command-line front end.

use std::path::PathBuf;

use clap::Parser;

use crate::config::{ExperimentConfig, Kind, Overrides};
use crate::experiments;

#[derive(Debug, Parser)]
#[command(
    name = "qplab",
    about = "Quasi-periodic Schrödinger operator experiments"
)]
pub struct Args {
    /// Experiment to run; overrides the config's `kind`.
    #[arg(value_enum)]
    pub kind: Kind,
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    pub out: Option<String>,
    #[arg(long)]
    pub precision_bits: Option<u32>,
    /// Worker threads for independent cells; results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

/// Runs one experiment and returns the process exit code.
pub fn run(args: &Args) -> i32 {
    let mut cfg = match ExperimentConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("qplab: {e}");
            return EXIT_ERROR;
        }
    };
    cfg.apply(&Overrides {
        kind: Some(args.kind),
        out: args.out.clone(),
        precision_bits: args.precision_bits,
    });
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
        {
            eprintln!("qplab: thread pool: {e}");
            return EXIT_ERROR;
        }
    }
    let report = match experiments::run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("qplab: {e}");
            return EXIT_ERROR;
        }
    };
    let dir = PathBuf::from(&report.config.output.dir);
    match report.write(&dir) {
        Ok(files) => {
            for c in &report.checks {
                println!(
                    "{} [{}] {}: {:.6e} ({})",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.theorem,
                    c.name,
                    c.value,
                    c.limit
                );
            }
            for f in files {
                println!("wrote {}", dir.join(f).display());
            }
        }
        Err(e) => {
            eprintln!("qplab: {e}");
            return EXIT_ERROR;
        }
    }
    if report.pass() {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}
