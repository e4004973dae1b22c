//! `gpe`: classification and verification runs for proper holomorphic maps
//! between generalized pseudoellipsoids.
//!
//! Exit codes: 0 all checks pass, 1 a check fails, 2 bad configuration or
//! hypothesis violation, 3 empty admissible list.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use report::Format;

#[derive(Parser, Debug)]
#[command(name = "gpe", version, about = "Proper holomorphic maps between generalized pseudoellipsoids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Number of sample points per check
    #[arg(long, global = true, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Absolute tolerance for boundary and equivalence checks
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    /// Lower bound on block norms for boundary samples
    #[arg(long, global = true, default_value_t = 1e-2)]
    pub sp_margin: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List admissible (sigma, M) for a source/target pair and verify each normal form
    Classify {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        /// Write every normal form as a map file into this directory
        #[arg(long)]
        emit_normal_forms: Option<PathBuf>,
    },
    /// Check that a polynomial map sends boundary to boundary and interior to interior
    VerifyProper {
        #[arg(long)]
        map: PathBuf,
    },
    /// Check the CR frame and Levi form identities on a signature
    VerifyFrame {
        #[arg(long)]
        sig: PathBuf,
    },
    /// Print the term table of H_M on C^m and check its norm identity exactly
    HMap {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        degree: u32,
    },
    /// Compare two maps up to a built-in family of target automorphisms
    Equivalence {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        map2: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let c = &cli.common;
    if !(c.tol > 0.0) || !(c.sp_margin > 0.0 && c.sp_margin < 0.5) || c.samples == 0 {
        eprintln!("error: need --tol > 0, --sp-margin in (0, 0.5) and --samples >= 1");
        return ExitCode::from(2);
    }
    let result = match &cli.command {
        Command::Classify {
            source,
            target,
            emit_normal_forms,
        } => commands::classify(c, source, target, emit_normal_forms.as_deref()),
        Command::VerifyProper { map } => commands::verify_proper(c, map),
        Command::VerifyFrame { sig } => commands::verify_frame(c, sig),
        Command::HMap { dim, degree } => commands::h_map(c, *dim, *degree),
        Command::Equivalence { map, map2 } => commands::equivalence(c, map, map2),
    };
    match result {
        Ok(mut report) => {
            report.finish(start.elapsed().as_secs_f64());
            print!("{}", report.render(c.format));
            let empty = report.admissible.as_ref().is_some_and(Vec::is_empty);
            ExitCode::from(if empty {
                3
            } else if report.pass {
                0
            } else {
                1
            })
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
