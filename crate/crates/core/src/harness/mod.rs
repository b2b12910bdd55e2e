//! Command implementations behind the `evfp` binary.

pub mod config;
pub mod output;
pub mod sweep;

use std::path::Path;

use crate::dynamics::{initial_data, simulate, RunRecord, Termination};
use crate::error::{Error, Result};
use crate::fit::{fit_blowup_samples, BlowupFit};
use crate::regime::{classify, RegimeVerdict};
use config::{Format, RunConfig};
use output::{read_timeseries, timeseries_csv, write_all_or_nothing, RunSummary};
use sweep::{run_sweep, sweep_csv, SweepRow};

pub const TIMESERIES_FILE: &str = "timeseries.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const SWEEP_FILE: &str = "sweep.csv";

/// Exit status for a run that ended in `STEP_FAILURE`.
pub const EXIT_STEP_FAILURE: i32 = 2;

pub struct SimulateOutcome {
    pub record: RunRecord,
    pub summary: RunSummary,
    pub exit_code: i32,
}

fn io_error(dir: &Path, e: std::io::Error) -> Error {
    Error::Config(format!("cannot write outputs to {}: {e}", dir.display()))
}

pub fn cmd_simulate(config: &RunConfig) -> Result<SimulateOutcome> {
    let init = initial_data(&config.initial_spec()?, &config.params)?;
    let record = simulate(&init, &config.params)?;
    let summary = RunSummary::from_record(&record);
    let mut files = Vec::new();
    if config.output.wants(Format::Csv) {
        files.push((TIMESERIES_FILE, timeseries_csv(&record.samples)?));
    }
    if config.output.wants(Format::Json) {
        let json = serde_json::to_vec_pretty(&summary)
            .map_err(|e| Error::Config(format!("summary serialization: {e}")))?;
        files.push((SUMMARY_FILE, json));
    }
    write_all_or_nothing(&config.output.dir, &files).map_err(|e| io_error(&config.output.dir, e))?;
    let exit_code = match record.termination {
        Termination::StepFailure { .. } => EXIT_STEP_FAILURE,
        _ => 0,
    };
    Ok(SimulateOutcome { record, summary, exit_code })
}

pub fn cmd_classify(config: &RunConfig) -> Result<RegimeVerdict> {
    let init = initial_data(&config.initial_spec()?, &config.params)?;
    classify(&sweep::initial_summary(&init, &config.params))
}

pub fn cmd_sweep(config: &RunConfig, resolve: bool, jobs: usize) -> Result<Vec<SweepRow>> {
    let rows = run_sweep(config, resolve, jobs)?;
    let bytes = sweep_csv(&rows)?;
    write_all_or_nothing(&config.output.dir, &[(SWEEP_FILE, bytes)])
        .map_err(|e| io_error(&config.output.dir, e))?;
    Ok(rows)
}

pub fn cmd_fit_blowup(timeseries: &str) -> Result<BlowupFit> {
    let samples = read_timeseries(timeseries)?;
    let h0 = samples
        .first()
        .map(|s| s.state.h)
        .ok_or_else(|| Error::Fit("timeseries has no rows".into()))?;
    fit_blowup_samples(&samples, h0)
}
