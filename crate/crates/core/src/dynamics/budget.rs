use super::RunRecord;
use crate::error::{Error, Result};

/// `ρa³ − ρ₀a₀³ − 3σNt + 3∫Ha³𝒫`, normalized by `ρ₀a₀³`, with the pressure
/// integral taken by the trapezoid rule over the recorded samples.
///
/// The integrator keeps its own quadrature of the same integral (reported in
/// [`super::Sample::budget_residual`]); this version only uses the series and
/// is therefore limited by the sample spacing.
pub fn rho_a3_budget(record: &RunRecord) -> Result<Vec<f64>> {
    let samples = &record.samples;
    if samples.len() < 2 {
        return Err(Error::Fit(format!(
            "budget needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    let first = &samples[0];
    let rho0a3 = first.moments.rho * first.state.a.powi(3);
    let scale = if rho0a3 > 0.0 { rho0a3 } else { 1.0 };
    let sigma_n = record.params.sigma * record.n0;
    let integrand = |i: usize| {
        let s = &samples[i];
        s.state.h * s.state.a.powi(3) * s.moments.p
    };
    let mut work = 0.0;
    let mut out = Vec::with_capacity(samples.len());
    for (i, s) in samples.iter().enumerate() {
        if i > 0 {
            let dt = s.state.t - samples[i - 1].state.t;
            work += 0.5 * dt * (integrand(i) + integrand(i - 1));
        }
        let t = s.state.t - first.state.t;
        let r = s.moments.rho * s.state.a.powi(3) - rho0a3 - 3.0 * sigma_n * t + 3.0 * work;
        out.push(r / scale);
    }
    Ok(out)
}

pub fn max_abs(values: &[f64]) -> f64 {
    values.iter().map(|v| v.abs()).fold(0.0, f64::max)
}
