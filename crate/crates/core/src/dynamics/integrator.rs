use serde::Serialize;

use super::{adapt_dt, constraint_residual, rhs, CosmoState, InitialState, ModelParams, MAX_HALVINGS};
use crate::error::{Error, Result};
use crate::fokker_planck::{fp_step, FpStepParams};
use crate::grid::{RadialDistribution, TAIL_WARNING_FRACTION};
use crate::moments::{compute_moments, energy_pressure, particle_number, MomentSet};

/// Once `|H|` exceeds this multiple of `|H₀|`, samples are spaced by growth of
/// `|H|` instead of by time.
const SINGULAR_SAMPLING_FACTOR: f64 = 10.0;
const SINGULAR_SAMPLING_GROWTH: f64 = 1.02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Termination {
    ReachedTEnd,
    BlowupDetected { t_stop: f64 },
    StepFailure { t: f64 },
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::ReachedTEnd => "REACHED_T_END",
            Termination::BlowupDetected { .. } => "BLOWUP_DETECTED",
            Termination::StepFailure { .. } => "STEP_FAILURE",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub state: CosmoState,
    pub moments: MomentSet,
    pub constraint_residual: f64,
    pub budget_residual: f64,
    pub tail_mass_fraction: f64,
    /// `∫₀ᵗ H a³ 𝒫 ds`, integrated alongside the ODEs.
    pub pressure_work: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub samples: Vec<Sample>,
    pub termination: Termination,
    pub failure: Option<String>,
    pub params: ModelParams,
    pub initial: CosmoState,
    pub n0: f64,
    pub rho0: f64,
    pub tail_warning: bool,
    pub steps: usize,
    pub rejected_steps: usize,
    pub final_distribution: RadialDistribution,
}

impl RunRecord {
    /// Largest relative drift of `N` over the recorded samples.
    pub fn n_drift(&self) -> f64 {
        let scale = if self.n0 > 0.0 { self.n0 } else { 1.0 };
        self.samples
            .iter()
            .map(|s| (s.moments.n - self.n0).abs() / scale)
            .fold(0.0, f64::max)
    }

    pub fn max_constraint_residual(&self) -> f64 {
        self.samples.iter().map(|s| s.constraint_residual.abs()).fold(0.0, f64::max)
    }

    pub fn max_budget_residual(&self) -> f64 {
        self.samples.iter().map(|s| s.budget_residual.abs()).fold(0.0, f64::max)
    }

    pub fn is_blowup(&self) -> bool {
        matches!(self.termination, Termination::BlowupDetected { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub state: CosmoState,
    pub f: RadialDistribution,
    /// Increment of `∫ H a³ 𝒫 dt` over the step.
    pub work: f64,
}

#[derive(Clone, Copy)]
struct OdeState {
    a: f64,
    h: f64,
    phi: f64,
    work: f64,
}

/// RK4 on `(a, H, φ, ∫Ha³𝒫)` with `F` frozen; `ρ, 𝒫` follow `a` at every stage.
fn ode_advance(y: OdeState, f: &RadialDistribution, n: f64, p: &ModelParams, dt: f64) -> Result<OdeState> {
    let deriv = |y: OdeState| -> Result<[f64; 4]> {
        if !(y.a > 0.0) || !y.a.is_finite() {
            return Err(Error::NonFinite("scale factor within a Runge–Kutta stage"));
        }
        let (rho, pressure) = energy_pressure(f, y.a);
        let (da, dh, dphi) = rhs(y.a, y.h, rho, pressure, n, p.sigma, p.k);
        Ok([da, dh, dphi, y.h * y.a.powi(3) * pressure])
    };
    let shift = |y: OdeState, k: &[f64; 4], c: f64| OdeState {
        a: y.a + c * k[0],
        h: y.h + c * k[1],
        phi: y.phi + c * k[2],
        work: y.work + c * k[3],
    };
    let k1 = deriv(y)?;
    let k2 = deriv(shift(y, &k1, 0.5 * dt))?;
    let k3 = deriv(shift(y, &k2, 0.5 * dt))?;
    let k4 = deriv(shift(y, &k3, dt))?;
    let comb = |i: usize| dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    Ok(OdeState {
        a: y.a + comb(0),
        h: y.h + comb(1),
        phi: y.phi + comb(2),
        work: y.work + comb(3),
    })
}

/// One Strang step: ODE half step, diffusion at the updated `a`, ODE half step.
pub fn step(s: &CosmoState, f: &RadialDistribution, p: &ModelParams, dt: f64) -> Result<StepOutput> {
    if !(dt > 0.0) {
        return Err(Error::param("dt", format!("must be > 0, got {dt}")));
    }
    let n = particle_number(f);
    let y0 = OdeState { a: s.a, h: s.h, phi: s.phi, work: 0.0 };
    let y1 = ode_advance(y0, f, n, p, 0.5 * dt)?;
    let f1 = fp_step(f, &FpStepParams::new(p.sigma, y1.a, dt)?)?;
    let y2 = ode_advance(y1, &f1, n, p, 0.5 * dt)?;
    let state = CosmoState { t: s.t + dt, a: y2.a, h: y2.h, phi: y2.phi };
    if !state.is_finite() || !y2.work.is_finite() {
        return Err(Error::NonFinite("cosmological state"));
    }
    Ok(StepOutput { state, f: f1, work: y2.work })
}

struct Recorder {
    samples: Vec<Sample>,
    n0: f64,
    rho0a3: f64,
    budget_scale: f64,
    sigma: f64,
    k: i32,
    tail_warning: bool,
}

impl Recorder {
    fn record(&mut self, s: &CosmoState, f: &RadialDistribution, work: f64) {
        if self.samples.last().is_some_and(|last| last.state.t >= s.t) {
            return;
        }
        let moments = compute_moments(f, s.a, s.phi, s.h);
        let budget = moments.rho * s.a.powi(3) - self.rho0a3 - 3.0 * self.sigma * self.n0 * s.t
            + 3.0 * work;
        let tail = f.tail_mass_fraction();
        self.tail_warning |= tail > TAIL_WARNING_FRACTION;
        self.samples.push(Sample {
            state: *s,
            moments,
            constraint_residual: constraint_residual(s, &moments, self.k),
            budget_residual: budget / self.budget_scale,
            tail_mass_fraction: tail,
            pressure_work: work,
        });
    }
}

/// Integrates from constrained initial data until `t_end`, blow-up or failure.
pub fn simulate(init: &InitialState, p: &ModelParams) -> Result<RunRecord> {
    p.validate()?;
    let s0 = init.state;
    let n0 = particle_number(&init.f);
    let rho0 = init.moments.rho;
    let rho0a3 = rho0 * s0.a.powi(3);
    let mut rec = Recorder {
        samples: Vec::new(),
        n0,
        rho0a3,
        budget_scale: if rho0a3 > 0.0 { rho0a3 } else { 1.0 },
        sigma: p.sigma,
        k: p.k,
        tail_warning: false,
    };
    let a_floor = p.a_floor_for(s0.a);
    let singular_h = SINGULAR_SAMPLING_FACTOR * s0.h.abs();

    let mut s = s0;
    let mut f = init.f.clone();
    let mut work = 0.0;
    let mut steps = 0;
    let mut rejected = 0;
    let mut failure = None;
    let mut termination = Termination::ReachedTEnd;

    if p.t_end > 0.0 {
        rec.record(&s, &f, work);
        let mut next_sample = p.cadence;
        let mut last_sampled_h = s.h.abs();
        let mut shrink = 1.0;
        let mut halvings = 0;
        while s.t < p.t_end {
            let (rho, _) = energy_pressure(&f, s.a);
            let m = MomentSet { n: n0, rho, ..init.moments };
            let base = adapt_dt(&s, &m, p);
            let dt = (base * shrink).min(p.t_end - s.t);
            if !(dt > 0.0) || s.t + dt == s.t {
                failure = Some(format!("time step underflow at t = {}", s.t));
                termination = Termination::StepFailure { t: s.t };
                break;
            }
            match step(&s, &f, p, dt) {
                Ok(out) => {
                    steps += 1;

                    halvings = 0;
                    shrink = (shrink * 2.0).min(1.0);
                    s = out.state;
                    if p.t_end - s.t <= 1e-14 * p.t_end.max(1.0) {
                        s.t = p.t_end;
                    }
                    f = out.f;
                    work += out.work;
                }
                Err(Error::Undershoot { .. }) => {
                    rejected += 1;
                    halvings += 1;
                    shrink *= 0.5;
                    if halvings >= MAX_HALVINGS {
                        failure = Some(format!("{MAX_HALVINGS} consecutive step halvings at t = {}", s.t));
                        termination = Termination::StepFailure { t: s.t };
                        break;
                    }
                    continue;
                }
                Err(e) => {
                    failure = Some(e.to_string());
                    termination = Termination::StepFailure { t: s.t };
                    break;
                }
            }
            if s.a < a_floor || s.h.abs() > p.h_ceiling {
                rec.record(&s, &f, work);
                termination = Termination::BlowupDetected { t_stop: s.t };
                break;
            }
            let h = s.h.abs();
            let due = if h > singular_h {
                h >= SINGULAR_SAMPLING_GROWTH * last_sampled_h
            } else {
                s.t >= next_sample
            };
            if due || s.t >= p.t_end {
                rec.record(&s, &f, work);
                last_sampled_h = h;
                while next_sample <= s.t && p.cadence > 0.0 {
                    next_sample += p.cadence;
                }
            }
        }
        if matches!(termination, Termination::StepFailure { .. }) {
            rec.record(&s, &f, work);
        }
    }

    Ok(RunRecord {
        samples: rec.samples,
        termination,
        failure,
        params: *p,
        initial: s0,
        n0,
        rho0,
        tail_warning: rec.tail_warning,
        steps,
        rejected_steps: rejected,
        final_distribution: f,
    })
}
