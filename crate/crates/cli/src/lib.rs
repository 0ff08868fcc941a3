//! Command-line runner: argument parsing, result records and the
//! figure-reproduction harness.

pub mod args;
mod error;
pub mod record;
pub mod reproduce;
pub mod run;

pub use error::{CliError, CliResult};
pub use record::ResultRecord;
pub use run::run;

use std::path::PathBuf;

use args::Cli;

/// Runs the parsed command, writes its record and returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    let out_dir = cli.output.out_dir.clone();
    let path = cli.output.out.clone().unwrap_or_else(|| out_dir.join(format!("{}.json", cli.command.name())));
    let record = match run(&cli.command, &out_dir) {
        Ok(mut rec) => {
            if !cli.output.deterministic {
                rec.timestamp = Some(chrono::Utc::now().to_rfc3339());
            }
            rec
        }
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    if let Err(e) = record.write(&path) {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    println!("{}", summary(&record, &path));
    if record.converged {
        0
    } else {
        eprintln!("warning: solver did not converge; best-effort result written");
        CliError::NonConvergence(String::new()).exit_code()
    }
}

fn summary(rec: &ResultRecord, path: &PathBuf) -> String {
    let mut parts = vec![format!("{} -> {}", rec.command, path.display())];
    if let Some(plan) = &rec.plan {
        parts.push(format!("objective {:.6}", plan.objective));
    }
    if let Some(r) = &rec.clearing {
        parts.push(format!("defaults {}", r.n_defaults));
        parts.push(format!("total unpaid {:.6}", r.total_unpaid()));
    }
    if !rec.files.is_empty() {
        parts.push(format!("wrote {}", rec.files.join(", ")));
    }
    parts.join("; ")
}
