//! Experiment runner behind the `gagliardo` binary.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod presets;

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

pub use config::{parse_config, ExperimentConfig, ExperimentKind};
pub use error::{CliError, ConfigErrors, ConfigIssue};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// What a finished run wrote and how its checks went.
#[derive(Debug)]
pub struct RunSummary {
    pub csv: PathBuf,
    pub manifest: PathBuf,
    pub rows: usize,
    pub checks: Vec<(String, bool)>,
}

/// Reads `config_path`, checks it describes `kind`, runs it on a pool of
/// `threads` workers (rayon's default when `None`) and writes
/// `<out>/<name>.csv` and `<out>/<name>.manifest`.
pub fn execute(kind: ExperimentKind, config_path: &Path, threads: Option<usize>, out: &Path) -> Result<RunSummary, CliError> {
    let text = std::fs::read_to_string(config_path).map_err(|source| CliError::ReadConfig {
        path: config_path.to_path_buf(),
        source,
    })?;
    let cfg = parse_config(&text)?;
    if cfg.kind != kind {
        return Err(CliError::KindMismatch {
            requested: kind.to_string(),
            found: cfg.kind.to_string(),
        });
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build()?;
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let clock = Instant::now();
    let outcome = pool.install(|| experiments::run(&cfg))?;
    let wall = clock.elapsed().as_secs_f64();

    let mut header = vec![format!("gagliardo {VERSION}"), format!("experiment={}", cfg.kind)];
    header.extend(cfg.entries().into_iter().map(|(k, v)| format!("config.{k}={v}")));
    let csv_path = out.join(format!("{}.csv", cfg.name));
    output::write(&csv_path, &outcome.table.to_csv(&header))?;

    let mut manifest = vec![
        ("tool".to_string(), "gagliardo".to_string()),
        ("version".to_string(), VERSION.to_string()),
        ("experiment".to_string(), cfg.kind.to_string()),
        ("config_path".to_string(), config_path.display().to_string()),
        ("results".to_string(), csv_path.display().to_string()),
        ("rows".to_string(), outcome.table.rows.len().to_string()),
        ("threads".to_string(), pool.current_num_threads().to_string()),
        ("started_unix".to_string(), started.to_string()),
        ("wall_seconds".to_string(), format!("{wall:.6}")),
    ];
    if outcome.total_checks > 0 {
        manifest.push((
            "checks_passed".to_string(),
            format!("{}/{}", outcome.total_checks - outcome.failed_checks, outcome.total_checks),
        ));
    }
    manifest.extend(cfg.entries().into_iter().map(|(k, v)| (format!("config.{k}"), v)));
    let manifest_path = out.join(format!("{}.manifest", cfg.name));
    output::write(&manifest_path, &output::manifest(&manifest))?;

    let summary = RunSummary {
        csv: csv_path,
        manifest: manifest_path,
        rows: outcome.table.rows.len(),
        checks: experiments::summary(&outcome.table),
    };
    if outcome.failed_checks > 0 {
        for (name, ok) in &summary.checks {
            eprintln!("{} {name}", if *ok { "PASS" } else { "FAIL" });
        }
        return Err(CliError::ChecksFailed {
            failed: outcome.failed_checks,
            total: outcome.total_checks,
        });
    }
    Ok(summary)
}
