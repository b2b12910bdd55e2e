//! Coupled evolution of the scale factor, Hubble function, scalar field and
//! particle distribution.
//!
//! ```text
//! ȧ = H a
//! Ḣ = −(ρ + 𝒫)/2 + k/a²
//! φ̇ = −3σN/a³
//! H² = (ρ + φ)/3 − k/a²      (monitored, never imposed)
//! ```

mod budget;
mod initial;
mod integrator;

pub use budget::{max_abs, rho_a3_budget};
pub use initial::{
    calibrate_gaussian, initial_data, Closure, GridSpec, InitialSpec, InitialState, ProfileSpec,
};
pub use integrator::{simulate, step, RunRecord, Sample, StepOutput, Termination};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::moments::MomentSet;
use crate::regime::check_curvature;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CosmoState {
    pub t: f64,
    pub a: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub phi: f64,
}

impl CosmoState {
    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.a.is_finite() && self.h.is_finite() && self.phi.is_finite()
    }
}

pub const DEFAULT_ETA: f64 = 1e-3;
pub const DEFAULT_DT_MAX: f64 = 0.05;
pub const DEFAULT_A_FLOOR_FACTOR: f64 = 1e-6;
pub const DEFAULT_H_CEILING: f64 = 1e8;
pub const MAX_HALVINGS: u32 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    pub sigma: f64,
    pub k: i32,
    pub eta: f64,
    pub dt_max: f64,
    /// Absolute floor; `None` means `1e-6·a₀`.
    pub a_floor: Option<f64>,
    #[serde(rename = "H_ceiling")]
    pub h_ceiling: f64,
    pub t_end: f64,
    /// Time between regular samples; zero records every step.
    pub cadence: f64,
}

impl ModelParams {
    pub fn new(sigma: f64, k: i32, t_end: f64) -> Self {
        Self {
            sigma,
            k,
            eta: DEFAULT_ETA,
            dt_max: DEFAULT_DT_MAX,
            a_floor: None,
            h_ceiling: DEFAULT_H_CEILING,
            t_end,
            cadence: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_curvature(self.k)?;
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::param("sigma", format!("must be >= 0, got {}", self.sigma)));
        }
        let positive = [("eta", self.eta), ("dt_max", self.dt_max), ("H_ceiling", self.h_ceiling)];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(Error::param(name, format!("must be > 0, got {v}")));
            }
        }
        if let Some(f) = self.a_floor {
            if !(f > 0.0) {
                return Err(Error::param("a_floor", format!("must be > 0, got {f}")));
            }
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::param("t_end", format!("must be finite and >= 0, got {}", self.t_end)));
        }
        if !(self.cadence >= 0.0) {
            return Err(Error::param("cadence", format!("must be >= 0, got {}", self.cadence)));
        }
        Ok(())
    }

    pub fn a_floor_for(&self, a0: f64) -> f64 {
        self.a_floor.unwrap_or(DEFAULT_A_FLOOR_FACTOR * a0)
    }
}

/// `(ȧ, Ḣ, φ̇)`.
pub fn ode_rhs(s: &CosmoState, m: &MomentSet, p: &ModelParams) -> (f64, f64, f64) {
    rhs(s.a, s.h, m.rho, m.p, m.n, p.sigma, p.k)
}

fn rhs(a: f64, h: f64, rho: f64, pressure: f64, n: f64, sigma: f64, k: i32) -> (f64, f64, f64) {
    (
        h * a,
        -(rho + pressure) / 2.0 + k as f64 / (a * a),
        -3.0 * sigma * n / (a * a * a),
    )
}

/// `H² − (ρ+φ)/3 + k/a²`.
pub fn raw_constraint(h: f64, a: f64, rho: f64, phi: f64, k: i32) -> f64 {
    h * h - (rho + phi) / 3.0 + k as f64 / (a * a)
}

/// [`raw_constraint`] divided by `max(H², (|ρ|+|φ|)/3, 1/a²)`.
pub fn normalized_constraint(h: f64, a: f64, rho: f64, phi: f64, k: i32) -> f64 {
    let scale = (h * h).max((rho.abs() + phi.abs()) / 3.0).max(1.0 / (a * a));
    raw_constraint(h, a, rho, phi, k) / scale
}

pub fn constraint_residual(s: &CosmoState, m: &MomentSet, k: i32) -> f64 {
    normalized_constraint(s.h, s.a, m.rho, s.phi, k)
}

/// Step size limiting the relative change of every ODE variable to about `η`.
///
/// The scalar-field bound uses `|φ| + ρ` as its scale so that it stays
/// finite when `φ` crosses zero.
pub fn adapt_dt(s: &CosmoState, m: &MomentSet, p: &ModelParams) -> f64 {
    let mut dt = p.dt_max.min(p.t_end - s.t);
    if s.h != 0.0 {
        dt = dt.min(p.eta / s.h.abs());
    }
    let phi_dot = -3.0 * p.sigma * m.n / s.a.powi(3);
    if phi_dot != 0.0 {
        dt = dt.min(p.eta * (s.phi.abs() + m.rho) / phi_dot.abs());
    }
    let scale = m.rho + s.phi.abs();
    if scale > 0.0 {
        dt = dt.min(p.eta / scale.sqrt());
    }
    dt
}
