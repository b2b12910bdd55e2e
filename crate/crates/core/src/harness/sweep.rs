//! Parameter sweeps over `(φ₀, σ)` with optional simulation of every cell.

use rayon::prelude::*;

use super::config::RunConfig;
use super::output::fmt_f64;
use crate::dynamics::{initial_data, simulate, InitialState, ModelParams, Termination};
use crate::error::{Error, Result};
use crate::regime::{classify, InitialSummary, RegimeVerdict, Verdict};

pub const SWEEP_COLUMNS: [&str; 8] = [
    "phi0",
    "sigma",
    "Sigma0",
    "Phi0",
    "verdict",
    "simulated_outcome",
    "q0_positive",
    "q_final_negative",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub phi0: f64,
    pub sigma: f64,
    pub sigma0: Option<f64>,
    pub phi0_ratio: Option<f64>,
    /// Verdict, or the reason the cell has no valid initial data.
    pub verdict: std::result::Result<Verdict, String>,
    pub outcome: Option<Termination>,
    pub q0_positive: Option<bool>,
    pub q_final_negative: Option<bool>,
}

/// Criteria inputs for constrained initial data.
pub fn initial_summary(init: &InitialState, p: &ModelParams) -> InitialSummary {
    InitialSummary {
        n: init.moments.n,
        rho0: init.moments.rho,
        a0: init.state.a,
        h0: init.state.h,
        phi0: init.state.phi,
        sigma: p.sigma,
        k: p.k,
    }
}

/// Run length for resolving a cell: blow-up cells are extended to
/// `10·(a₀³H₀φ₀/(σN) + 1)` so a missing singularity is a real contradiction.
pub fn resolve_t_end(base: f64, verdict: &RegimeVerdict) -> f64 {
    if verdict.verdict != Verdict::BlowupGuaranteed {
        return base;
    }
    let d = &verdict.input;
    let horizon = 10.0 * (d.a0.powi(3) * d.h0 * d.phi0 / (d.sigma * d.n) + 1.0);
    base.max(horizon)
}

fn run_cell(config: &RunConfig, phi0: f64, sigma: f64, resolve: bool) -> Result<SweepRow> {
    let mut params = config.params;
    params.sigma = sigma;
    let mut row = SweepRow {
        phi0,
        sigma,
        sigma0: None,
        phi0_ratio: None,
        verdict: Err(String::new()),
        outcome: None,
        q0_positive: None,
        q_final_negative: None,
    };
    let init = match initial_data(&config.sweep_spec(phi0), &params) {
        Ok(init) => init,
        Err(Error::InitialData(msg)) => {
            row.verdict = Err(msg);
            return Ok(row);
        }
        Err(e) => return Err(e),
    };
    let verdict = classify(&initial_summary(&init, &params))?;
    row.sigma0 = Some(verdict.sigma0);
    row.phi0_ratio = verdict.phi0_ratio;
    row.verdict = Ok(verdict.verdict);
    if resolve {
        params.t_end = resolve_t_end(params.t_end, &verdict);
        let record = simulate(&init, &params)?;
        row.outcome = Some(record.termination);
        row.q0_positive = record.samples.first().map(|s| s.moments.q > 0.0);
        row.q_final_negative = record.samples.last().map(|s| s.moments.q < 0.0);
    }
    Ok(row)
}

/// Every `(φ₀, σ)` cell in lexicographic order, `φ₀` outermost. `jobs = 0`
/// uses all cores.
pub fn run_sweep(config: &RunConfig, resolve: bool, jobs: usize) -> Result<Vec<SweepRow>> {
    let sweep = config
        .sweep
        .ok_or_else(|| Error::Config("missing [sweep] section".into()))?;
    let cells: Vec<(f64, f64)> = sweep
        .phi0
        .values()
        .into_iter()
        .flat_map(|phi| sweep.sigma.values().into_iter().map(move |s| (phi, s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    pool.install(|| {
        cells
            .par_iter()
            .map(|&(phi, s)| run_cell(config, phi, s, resolve))
            .collect()
    })
}

pub fn sweep_csv(rows: &[SweepRow]) -> Result<Vec<u8>> {
    let csv_err = |e: csv::Error| Error::Config(format!("csv: {e}"));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_COLUMNS).map_err(csv_err)?;
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    let flag = |v: Option<bool>| v.map(|b| b.to_string()).unwrap_or_default();
    for r in rows {
        let verdict = match &r.verdict {
            Ok(v) => v.as_str().to_string(),
            Err(_) => "INVALID_INITIAL_DATA".to_string(),
        };
        w.write_record([
            fmt_f64(r.phi0),
            fmt_f64(r.sigma),
            opt(r.sigma0),
            opt(r.phi0_ratio),
            verdict,
            r.outcome.map(|o| o.as_str().to_string()).unwrap_or_default(),
            flag(r.q0_positive),
            flag(r.q_final_negative),
        ])
        .map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Config(format!("csv: {e}")))
}

/// Cells where the criteria and the simulation disagree.
pub fn contradictions(rows: &[SweepRow]) -> Vec<&SweepRow> {
    rows.iter()
        .filter(|r| {
            matches!(
                (&r.verdict, r.outcome),
                (Ok(Verdict::GlobalGuaranteed), Some(Termination::BlowupDetected { .. }))
                    | (Ok(Verdict::BlowupGuaranteed), Some(Termination::ReachedTEnd))
            )
        })
        .collect()
}
