//! Serialization of run records, summaries and sweep tables.

use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;

use crate::dynamics::{CosmoState, ModelParams, RunRecord, Sample, Termination};
use crate::error::{Error, Result};
use crate::fit::{fit_asymptotics, fit_blowup, AsymptoticFit, BlowupFit};
use crate::moments::MomentSet;

pub const TIMESERIES_COLUMNS: [&str; 14] = [
    "t",
    "a",
    "H",
    "phi",
    "N",
    "rho",
    "P",
    "q",
    "Q",
    "ricci",
    "l2",
    "constraint_residual",
    "budget_residual",
    "tail_mass_fraction",
];

/// Fixed 17-significant-digit rendering used in every CSV.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn timeseries_csv(samples: &[Sample]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Config(format!("csv: {e}"));
    w.write_record(TIMESERIES_COLUMNS).map_err(csv_err)?;
    for s in samples {
        let m = &s.moments;
        let row = [
            fmt_f64(s.state.t),
            fmt_f64(s.state.a),
            fmt_f64(s.state.h),
            fmt_f64(s.state.phi),
            fmt_f64(m.n),
            fmt_f64(m.rho),
            fmt_f64(m.p),
            fmt_f64(m.q),
            m.deceleration.map(fmt_f64).unwrap_or_default(),
            fmt_f64(m.ricci),
            fmt_f64(m.l2),
            fmt_f64(s.constraint_residual),
            fmt_f64(s.budget_residual),
            fmt_f64(s.tail_mass_fraction),
        ];
        w.write_record(&row).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Config(format!("csv: {e}")))
}

/// Reads a timeseries written by [`timeseries_csv`]. The pressure-work column
/// is not stored and comes back as zero.
pub fn read_timeseries(text: &str) -> Result<Vec<Sample>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| Error::Config(format!("csv header: {e}")))?;
    if header.iter().ne(TIMESERIES_COLUMNS) {
        return Err(Error::Config(format!(
            "unexpected timeseries header `{}`",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut out = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::Config(format!("csv row {}: {e}", line + 2)))?;
        let field = |i: usize| -> Result<Option<f64>> {
            let s = rec.get(i).unwrap_or("").trim();
            if s.is_empty() {
                return Ok(None);
            }
            s.parse().map(Some).map_err(|_| {
                Error::Config(format!("csv row {}: column {} is not a number: `{s}`", line + 2, TIMESERIES_COLUMNS[i]))
            })
        };
        let req = |i: usize| -> Result<f64> {
            field(i)?.ok_or_else(|| Error::Config(format!("csv row {}: column {} empty", line + 2, TIMESERIES_COLUMNS[i])))
        };
        out.push(Sample {
            state: CosmoState { t: req(0)?, a: req(1)?, h: req(2)?, phi: req(3)? },
            moments: MomentSet {
                n: req(4)?,
                rho: req(5)?,
                p: req(6)?,
                q: req(7)?,
                deceleration: field(8)?,
                ricci: req(9)?,
                l2: req(10)?,
            },
            constraint_residual: req(11)?,
            budget_residual: req(12)?,
            tail_mass_fraction: req(13)?,
            pressure_work: 0.0,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub termination: &'static str,
    pub t_stop: Option<f64>,
    pub failure: Option<String>,
    pub steps: usize,
    pub rejected_steps: usize,
    pub samples: usize,
    pub initial: CosmoState,
    pub rho0: f64,
    #[serde(rename = "N0")]
    pub n0: f64,
    #[serde(rename = "N_drift")]
    pub n_drift: f64,
    pub max_constraint_residual: f64,
    pub max_budget_residual: f64,
    pub tail_warning: bool,
    pub max_tail_mass_fraction: f64,
    pub params: ModelParams,
    pub blowup_fit: Option<BlowupFit>,
    pub asymptotic_fit: Option<AsymptoticFit>,
    pub fit_error: Option<String>,
}

impl RunSummary {
    pub fn from_record(record: &RunRecord) -> Self {
        let (blowup_fit, asymptotic_fit, fit_error) = match record.termination {
            Termination::BlowupDetected { .. } => match fit_blowup(record) {
                Ok(f) => (Some(f), None, None),
                Err(e) => (None, None, Some(e.to_string())),
            },
            Termination::ReachedTEnd if !record.samples.is_empty() => match fit_asymptotics(record) {
                Ok(f) => (None, Some(f), None),
                Err(e) => (None, None, Some(e.to_string())),
            },
            _ => (None, None, None),
        };
        let t_stop = match record.termination {
            Termination::BlowupDetected { t_stop } => Some(t_stop),
            Termination::StepFailure { t } => Some(t),
            Termination::ReachedTEnd => record.samples.last().map(|s| s.state.t),
        };
        Self {
            termination: record.termination.as_str(),
            t_stop,
            failure: record.failure.clone(),
            steps: record.steps,
            rejected_steps: record.rejected_steps,
            samples: record.samples.len(),
            initial: record.initial,
            rho0: record.rho0,
            n0: record.n0,
            n_drift: record.n_drift(),
            max_constraint_residual: record.max_constraint_residual(),
            max_budget_residual: record.max_budget_residual(),
            tail_warning: record.tail_warning,
            max_tail_mass_fraction: record
                .samples
                .iter()
                .map(|s| s.tail_mass_fraction)
                .fold(0.0, f64::max),
            params: record.params,
            blowup_fit,
            asymptotic_fit,
            fit_error,
        }
    }
}

/// Writes every file under `dir` or none of them: contents go to hidden
/// temporaries first and are renamed into place only after all writes
/// succeed.
pub fn write_all_or_nothing(dir: &Path, files: &[(&str, Vec<u8>)]) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut staged = Vec::with_capacity(files.len());
    for (name, bytes) in files {
        let tmp = dir.join(format!(".{name}.tmp"));
        if let Err(e) = fs::write(&tmp, bytes) {
            let _ = fs::remove_file(&tmp);
            for (t, _) in &staged {
                let _ = fs::remove_file(t);
            }
            return Err(e);
        }
        staged.push((tmp, dir.join(name)));
    }
    for (i, (tmp, target)) in staged.iter().enumerate() {
        if let Err(e) = fs::rename(tmp, target) {
            for (t, _) in &staged[i..] {
                let _ = fs::remove_file(t);
            }
            return Err(e);
        }
    }
    Ok(())
}
