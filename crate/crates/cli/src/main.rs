use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use gagliardo_cli::{execute, ExperimentKind};

/// Run a weighted fractional energy experiment described by a config file.
#[derive(Parser, Debug)]
#[command(name = "gagliardo", version)]
struct Args {
    /// Experiment to run; must match `kind` in the config
    #[arg(value_enum)]
    experiment: ExperimentKind,

    /// Path to the key=value config
    #[arg(long)]
    config: PathBuf,

    /// Worker threads (default: one per core)
    #[arg(long)]
    threads: Option<usize>,

    /// Directory for the CSV and manifest
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.threads == Some(0) {
        eprintln!("error: --threads must be at least 1");
        return ExitCode::from(2);
    }
    match execute(args.experiment, &args.config, args.threads, &args.out) {
        Ok(summary) => {
            for (name, ok) in &summary.checks {
                println!("{} {name}", if *ok { "PASS" } else { "FAIL" });
            }
            println!("wrote {} ({} rows) and {}", summary.csv.display(), summary.rows, summary.manifest.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
