//! Blow-up time extrapolation, power-law fits near the singularity and
//! late-time rate fits for global runs.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::dynamics::{RunRecord, Sample, Termination};
use crate::error::{Error, Result};

pub const MIN_FIT_POINTS: usize = 5;
/// Half-width added to every exponent corridor.
pub const CORRIDOR_SLACK: f64 = 0.05;
/// `|H|` must exceed this multiple of `|H₀|` for a sample to enter the
/// blow-up time fit.
pub const TMAX_H_FACTOR: f64 = 10.0;

/// Ordinary least squares `y ≈ α + βx`; returns `(α, β, rms residual)`.
fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    let n = x.len();
    if n < MIN_FIT_POINTS {
        return Err(Error::Fit(format!("need {MIN_FIT_POINTS} points, got {n}")));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Fit("abscissae have zero spread".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - intercept - slope * a;
            r * r
        })
        .sum();
    Ok((intercept, slope, (ss / n as f64).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TmaxEstimate {
    pub t_max: f64,
    pub window: (f64, f64),
    pub points: usize,
}

/// Zero crossing of the affine fit of `1/H` against `t` over the last decade
/// of `|H|` among samples with `H < −10|H₀|`.
pub fn estimate_tmax(series: &[(f64, f64)], h0: f64) -> Result<TmaxEstimate> {
    let cutoff = -TMAX_H_FACTOR * h0.abs();
    let qualifying: Vec<(f64, f64)> = series.iter().copied().filter(|&(_, h)| h < cutoff).collect();
    let Some(&(t_last, h_last)) = qualifying.last() else {
        return Err(Error::Fit(format!("no samples with H < {cutoff}")));
    };
    let tail: Vec<(f64, f64)> = qualifying
        .iter()
        .copied()
        .filter(|&(_, h)| h.abs() >= 0.1 * h_last.abs())
        .collect();
    if tail.len() < MIN_FIT_POINTS {
        return Err(Error::Fit(format!(
            "{} samples in the last decade of |H|, need {MIN_FIT_POINTS}",
            tail.len()
        )));
    }
    if tail.windows(2).any(|w| !(w[1].0 > w[0].0 && w[1].1 < w[0].1)) {
        return Err(Error::Fit("H is not decreasing over the fit window".into()));
    }
    let t: Vec<f64> = tail.iter().map(|p| p.0).collect();
    let inv: Vec<f64> = tail.iter().map(|p| 1.0 / p.1).collect();
    let (alpha, beta, _) = linear_fit(&t, &inv)?;
    let t_max = -alpha / beta;
    if !(t_max > t_last) {
        return Err(Error::Fit(format!(
            "extrapolated blow-up time {t_max} precedes the last sample {t_last}"
        )));
    }
    Ok(TmaxEstimate { t_max, window: (t[0], t_last), points: tail.len() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerFit {
    /// Signed exponent: `|y| ≈ c·(t_max − t)^p`.
    pub p: f64,
    pub c: f64,
    pub residual: f64,
    pub points: usize,
}

/// Least squares of `ln|y|` against `ln(t_max − t)`.
pub fn fit_power(series: &[(f64, f64)], t_max: f64) -> Result<PowerFit> {
    let mut x = Vec::with_capacity(series.len());
    let mut y = Vec::with_capacity(series.len());
    for &(t, v) in series {
        if !(t < t_max) {
            return Err(Error::Fit(format!("sample at t = {t} not before t_max = {t_max}")));
        }
        if !(v != 0.0) || !v.is_finite() {
            return Err(Error::Fit(format!("|y| must be positive and finite, got {v} at t = {t}")));
        }
        x.push((t_max - t).ln());
        y.push(v.abs().ln());
    }
    let (intercept, slope, residual) = linear_fit(&x, &y)?;
    Ok(PowerFit { p: slope, c: intercept.exp(), residual, points: x.len() })
}

/// Exponent range allowed for one quantity near the singularity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Corridor {
    pub lo: f64,
    pub hi: f64,
}

impl Corridor {
    pub fn contains(&self, p: f64, slack: f64) -> bool {
        p >= self.lo - slack && p <= self.hi + slack
    }
}

/// Exponent bounds for `H, a, φ, ρ` at a `k ≤ 0` singularity.
pub fn blowup_corridors() -> BTreeMap<&'static str, Corridor> {
    BTreeMap::from([
        ("H", Corridor { lo: -1.0, hi: -0.5 }),
        ("a", Corridor { lo: 0.5, hi: 1.0 }),
        ("phi", Corridor { lo: -2.0, hi: -0.5 }),
        ("rho", Corridor { lo: -2.0, hi: -1.5 }),
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorridorCheck {
    pub p: f64,
    pub lo: f64,
    pub hi: f64,
    pub slack: f64,
    pub inside: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowupFit {
    pub t_max_est: f64,
    /// Half of the last sampling interval.
    pub t_max_uncertainty: f64,
    pub window: (f64, f64),
    pub exponents: BTreeMap<&'static str, PowerFit>,
    /// Largest rms log residual over the fitted quantities.
    pub residual: f64,
    pub corridors: BTreeMap<&'static str, CorridorCheck>,
    pub ricci_initial: f64,
    pub ricci_final: f64,
    /// `R` at the last sample is below `−10³·|R(0)|`.
    pub ricci_diverges: bool,
}

type Extract = fn(&Sample) -> f64;

fn quantities() -> [(&'static str, Extract); 5] {
    [
        ("H", |s| s.state.h),
        ("a", |s| s.state.a),
        ("phi", |s| s.state.phi),
        ("rho", |s| s.moments.rho),
        ("ricci", |s| s.moments.ricci),
    ]
}

/// Blow-up time and singular exponents from the last decade of `t_max − t`.
pub fn fit_blowup(record: &RunRecord) -> Result<BlowupFit> {
    fit_blowup_samples(&record.samples, record.initial.h)
}

/// As [`fit_blowup`] for a bare sample series starting at the initial state
/// with Hubble value `h0`.
pub fn fit_blowup_samples(samples: &[Sample], h0: f64) -> Result<BlowupFit> {
    let (Some(first), Some(last)) = (samples.first(), samples.last()) else {
        return Err(Error::Fit("empty record".into()));
    };
    let series: Vec<(f64, f64)> = samples.iter().map(|s| (s.state.t, s.state.h)).collect();
    let est = estimate_tmax(&series, h0)?;
    let t_max = est.t_max;
    let t_last = last.state.t;
    let uncertainty = match samples.len() {
        n if n >= 2 => 0.5 * (t_last - samples[n - 2].state.t),
        _ => 0.0,
    };
    let reach = 10.0 * (t_max - t_last);
    let window: Vec<&Sample> = samples.iter().filter(|s| t_max - s.state.t <= reach).collect();
    if window.len() < MIN_FIT_POINTS {
        return Err(Error::Fit(format!(
            "{} samples in the last decade before t_max, need {MIN_FIT_POINTS}",
            window.len()
        )));
    }
    let mut exponents = BTreeMap::new();
    for (name, get) in quantities() {
        let pts: Vec<(f64, f64)> = window.iter().map(|s| (s.state.t, get(s))).collect();
        exponents.insert(name, fit_power(&pts, t_max)?);
    }
    let residual = exponents.values().map(|f| f.residual).fold(0.0, f64::max);
    let slack = CORRIDOR_SLACK + uncertainty / (t_max - t_last);
    let corridors = blowup_corridors()
        .into_iter()
        .map(|(name, c)| {
            let p = exponents[name].p;
            (name, CorridorCheck { p, lo: c.lo, hi: c.hi, slack, inside: c.contains(p, slack) })
        })
        .collect();
    let ricci_initial = first.moments.ricci;
    let ricci_final = last.moments.ricci;
    Ok(BlowupFit {
        t_max_est: t_max,
        t_max_uncertainty: uncertainty,
        window: (window[0].state.t, t_last),
        exponents,
        residual,
        corridors,
        ricci_initial,
        ricci_final,
        ricci_diverges: ricci_final < -1e3 * ricci_initial.abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticFit {
    pub phi_inf_est: f64,
    #[serde(rename = "H_limit_est")]
    pub h_limit_est: f64,
    /// `√(φ_∞/3)`, or zero when `φ_∞ ≤ 0`.
    #[serde(rename = "H_limit_expected")]
    pub h_limit_expected: f64,
    /// `|H_limit_est − √(φ_∞/3)| < 1%·√(φ_∞/3)`.
    #[serde(rename = "H_limit_matches")]
    pub h_limit_matches: bool,
    /// Decay rate of `φ − φ_∞`; absent when `φ` does not move.
    pub rate: Option<f64>,
    /// `3√(φ_∞/3)`.
    pub expected_rate: f64,
    pub window: (f64, f64),
    pub residual: Option<f64>,
}

/// Relative gaps `(φ − φ_∞)/|φ_∞|` used for the exponential fit.
const RATE_GAP: (f64, f64) = (1e-10, 1e-4);

/// Late-time limits of a run that reached `t_end`.
pub fn fit_asymptotics(record: &RunRecord) -> Result<AsymptoticFit> {
    if record.termination != Termination::ReachedTEnd {
        return Err(Error::Fit(format!(
            "asymptotic fit needs a global run, termination was {}",
            record.termination.as_str()
        )));
    }
    let samples = &record.samples;
    let Some(last) = samples.last() else {
        return Err(Error::Fit("empty record".into()));
    };
    let t_end = last.state.t;
    let phi_inf = last.state.phi;
    let h_expected = if phi_inf > 0.0 { (phi_inf / 3.0).sqrt() } else { 0.0 };
    if phi_inf > 0.0 && t_end < 20.0 / h_expected {
        return Err(Error::Fit(format!(
            "t_end = {t_end} shorter than 20/√(φ/3) = {}",
            20.0 / h_expected
        )));
    }
    let decade: Vec<&Sample> = samples.iter().filter(|s| s.state.t >= 0.1 * t_end).collect();
    if decade.len() < 2 {
        return Err(Error::Fit("fewer than 2 samples in the last decade".into()));
    }
    let span = decade[decade.len() - 1].state.t - decade[0].state.t;
    let h_limit = if span > 0.0 {
        decade
            .windows(2)
            .map(|w| 0.5 * (w[0].state.h + w[1].state.h) * (w[1].state.t - w[0].state.t))
            .sum::<f64>()
            / span
    } else {
        decade[0].state.h
    };

    let scale = if phi_inf != 0.0 { phi_inf.abs() } else { record.initial.phi.abs().max(1.0) };
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .map(|s| (s.state.t, (s.state.phi - phi_inf) / scale))
        .filter(|&(_, gap)| gap >= RATE_GAP.0 && gap <= RATE_GAP.1)
        .collect();
    let (rate, residual, window) = if pts.len() >= MIN_FIT_POINTS {
        let t: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let y: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
        let (_, slope, res) = linear_fit(&t, &y)?;
        (Some(-slope), Some(res), (t[0], t[t.len() - 1]))
    } else {
        (None, None, (decade[0].state.t, t_end))
    };
    Ok(AsymptoticFit {
        phi_inf_est: phi_inf,
        h_limit_est: h_limit,
        h_limit_expected: h_expected,
        h_limit_matches: (h_limit - h_expected).abs() < 0.01 * h_expected,
        rate,
        expected_rate: 3.0 * h_expected,
        window,
        residual,
    })
}
