//! Batch execution of a config: experiments run on up to `jobs` threads,
//! each writes its tables atomically, and a manifest records the lot.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use qgibbs::adiabatic::{AdiabaticCondition, DEFAULT_TARGET_FIDELITY};
use qgibbs::markov::DEFAULT_TV_THRESHOLD;
use serde_json::Value;

use crate::config::{ExperimentConfig, RunConfig};
use crate::error::{core_exit_code, CliError};
use crate::experiments::{run_experiment, ExperimentOutput};
use crate::output::{sha256_hex, write_atomic, Conventions, ExperimentEntry, FileEntry, Manifest, MANIFEST_FILE};

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub jobs: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub manifest: Manifest,
    pub manifest_path: PathBuf,
    /// Exit code of the worst failure, 0 when all experiments succeeded.
    pub exit_code: i32,
}

fn write_outputs(cfg: &ExperimentConfig, out: &ExperimentOutput, dir: &Path) -> Result<Vec<FileEntry>, CliError> {
    cfg.output_files()
        .into_iter()
        .zip(&out.tables)
        .map(|(file, table)| {
            let bytes = table.to_bytes();
            write_atomic(&dir.join(&file), &bytes)?;
            Ok(FileEntry {
                path: file,
                columns: table.columns.clone(),
                rows: table.rows.len(),
                sha256: sha256_hex(&bytes),
            })
        })
        .collect()
}

fn run_one(cfg: &ExperimentConfig, opts: &RunOptions) -> ExperimentEntry {
    let start = Instant::now();
    let result = run_experiment(cfg, opts.seed)
        .map_err(CliError::from)
        .and_then(|out| write_outputs(cfg, &out, &opts.out_dir).map(|files| (files, out.summary)));
    let wall_time_seconds = start.elapsed().as_secs_f64();
    let (status, error, exit_code, files, summary) = match result {
        Ok((files, summary)) => ("ok", None, None, files, summary),
        Err(e) => {
            let code = match &e {
                CliError::Core(c) => core_exit_code(c),
                other => other.exit_code(),
            };
            ("failed", Some(e.to_string()), Some(code), Vec::new(), Value::Null)
        }
    };
    ExperimentEntry {
        name: cfg.name().to_string(),
        kind: cfg.kind.label(),
        status,
        error,
        exit_code,
        wall_time_seconds,
        files,
        summary,
    }
}

/// Runs every experiment; failures are recorded per experiment and do not
/// stop the others.
pub fn run_config(cfg: &RunConfig, config_text: &str, opts: &RunOptions) -> Result<RunSummary, CliError> {
    let start = Instant::now();
    let jobs = opts.jobs.max(1).min(cfg.experiments.len());
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<ExperimentEntry>>> = Mutex::new(vec![None; cfg.experiments.len()]);
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::SeqCst);
                let Some(e) = cfg.experiments.get(k) else { break };
                let entry = run_one(e, opts);
                slots.lock().expect("no worker panics while holding the lock")[k] = Some(entry);
            });
        }
    });
    let experiments: Vec<ExperimentEntry> = slots
        .into_inner()
        .expect("workers finished")
        .into_iter()
        .map(|e| e.expect("every experiment ran"))
        .collect();
    let exit_code = experiments.iter().filter_map(|e| e.exit_code).max().unwrap_or(0);
    let tv = cfg
        .experiments
        .iter()
        .find_map(|e| e.tolerances.tv_threshold)
        .unwrap_or(DEFAULT_TV_THRESHOLD);
    let fidelity = cfg
        .experiments
        .iter()
        .find_map(|e| e.tolerances.target_fidelity)
        .unwrap_or(DEFAULT_TARGET_FIDELITY);
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config_sha256: sha256_hex(config_text.as_bytes()),
        seed: opts.seed,
        jobs,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        conventions: Conventions {
            tv_threshold: tv,
            target_fidelity: fidelity,
            t_a_search: "bisection over the global schedule speed",
            schedule: AdiabaticCondition::default().label(),
            mixing_time_unit: "t_mix in single-site steps, t_m = t_mix / n",
        },
        experiments,
    };
    let manifest_path = opts.out_dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
    write_atomic(&manifest_path, text.as_bytes())?;
    Ok(RunSummary {
        manifest,
        manifest_path,
        exit_code,
    })
}
