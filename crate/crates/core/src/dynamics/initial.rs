use std::sync::Arc;

use serde::Serialize;

use super::{normalized_constraint, ModelParams};
use crate::dynamics::CosmoState;
use crate::error::{Error, Result};
use crate::grid::{sample_profile, Profile, RadialDistribution, RadialGrid};
use crate::moments::{compute_moments, MomentSet};

/// Largest normalized constraint violation accepted in [`Closure::Check`].
pub const CHECK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub n_cells: usize,
    pub r_max: f64,
    /// Geometric growth ratio of outer cells; `1` is uniform.
    pub stretch: f64,
}

impl GridSpec {
    pub fn uniform(n_cells: usize, r_max: f64) -> Self {
        Self { n_cells, r_max, stretch: 1.0 }
    }

    pub fn build(&self) -> Result<Arc<RadialGrid>> {
        Ok(Arc::new(RadialGrid::stretched(self.n_cells, self.r_max, self.stretch)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileSpec {
    Explicit(Profile),
    /// Gaussian whose width and amplitude are tuned so the discrete particle
    /// number and energy density at `a₀` hit the given values.
    CalibratedGaussian { n: f64, rho0: f64 },
}

/// How the constraint `H₀² = (ρ₀+φ₀)/3 − k/a₀²` is closed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Closure {
    Check { h0: f64, phi0: f64 },
    SolvePhi0 { h0: f64 },
    SolveH0 { phi0: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialSpec {
    pub grid: GridSpec,
    pub profile: ProfileSpec,
    pub a0: f64,
    pub closure: Closure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialState {
    pub state: CosmoState,
    pub f: RadialDistribution,
    pub profile: Profile,
    pub moments: MomentSet,
}

/// Width and amplitude of a gaussian with discrete `N = n` and `ρ(a₀) = rho0`.
pub fn calibrate_gaussian(grid: &Arc<RadialGrid>, a0: f64, n: f64, rho0: f64) -> Result<Profile> {
    if !(n > 0.0) || !(rho0 > 0.0) {
        return Err(Error::InitialData(format!(
            "calibrated gaussian needs N > 0 and rho0 > 0 (got {n}, {rho0})"
        )));
    }
    let target = rho0 / n;
    let floor = 1.0 / a0.powi(3);
    if target <= floor {
        return Err(Error::InitialData(format!(
            "rho0 must exceed N/a0³ = {} for a gaussian (got rho0 = {rho0})",
            n * floor
        )));
    }
    let ratio = |w: f64| -> Result<(f64, f64)> {
        let p = Profile::Gaussian { amplitude: 1.0, width: w };
        let f = sample_profile(&p, grid)?;
        let m = compute_moments(&f, a0, 0.0, 0.0);
        Ok((m.rho / m.n, m.n))
    };
    let mut lo = grid.width(0).ln();
    let mut hi = (grid.r_max() / 7.0).ln();
    if ratio(lo.exp())?.0 >= target || ratio(hi.exp())?.0 <= target {
        return Err(Error::InitialData(format!(
            "rho0/N = {target} not reachable by a gaussian on this grid"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ratio(mid.exp())?.0 < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let width = (0.5 * (lo + hi)).exp();
    let (_, unit_n) = ratio(width)?;
    Ok(Profile::Gaussian { amplitude: n / unit_n, width })
}

pub fn initial_data(spec: &InitialSpec, p: &ModelParams) -> Result<InitialState> {
    p.validate()?;
    let a0 = spec.a0;
    if !(a0 > 0.0) || !a0.is_finite() {
        return Err(Error::InitialData(format!("a0 > 0 required, got {a0}")));
    }
    let grid = spec.grid.build()?;
    let profile = match spec.profile {
        ProfileSpec::Explicit(profile) => profile,
        ProfileSpec::CalibratedGaussian { n, rho0 } => calibrate_gaussian(&grid, a0, n, rho0)?,
    };
    let f = sample_profile(&profile, &grid)?;
    let rho0 = compute_moments(&f, a0, 0.0, 0.0).rho;
    let curvature = p.k as f64 / (a0 * a0);
    let (h0, phi0) = match spec.closure {
        Closure::Check { h0, phi0 } => {
            let residual = normalized_constraint(h0, a0, rho0, phi0, p.k);
            if !(residual.abs() <= CHECK_TOLERANCE) {
                return Err(Error::InitialData(format!(
                    "H0² = (rho0 + phi0)/3 − k/a0² violated: normalized residual {residual:e}"
                )));
            }
            (h0, phi0)
        }
        Closure::SolvePhi0 { h0 } => (h0, 3.0 * (h0 * h0 + curvature) - rho0),
        Closure::SolveH0 { phi0 } => {
            let disc = (rho0 + phi0) / 3.0 - curvature;
            if !(disc >= 0.0) {
                return Err(Error::InitialData(format!(
                    "(rho0 + phi0)/3 − k/a0² = {disc} < 0: no real H0"
                )));
            }
            (disc.sqrt(), phi0)
        }
    };
    if !(h0 > 0.0) || !h0.is_finite() {
        return Err(Error::InitialData(format!("H0 > 0 required, got {h0}")));
    }
    if !(phi0 > 0.0) || !phi0.is_finite() {
        return Err(Error::InitialData(format!("phi0 > 0 required, got {phi0}")));
    }
    let state = CosmoState { t: 0.0, a: a0, h: h0, phi: phi0 };
    let moments = compute_moments(&f, a0, phi0, h0);
    Ok(InitialState { state, f, profile, moments })
}
