//! Closed-form classification of initial data into guaranteed global
//! existence, guaranteed blow-up, or undetermined.

use serde::Serialize;

use crate::dynamics::normalized_constraint;
use crate::error::{Error, Result};
use crate::special::scaled_gaussian_tail;

/// Largest normalized constraint violation accepted by [`classify`].
pub const CONSTRAINT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    GlobalGuaranteed,
    BlowupGuaranteed,
    Undetermined,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::GlobalGuaranteed => "GLOBAL_GUARANTEED",
            Verdict::BlowupGuaranteed => "BLOWUP_GUARANTEED",
            Verdict::Undetermined => "UNDETERMINED",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Criterion {
    B1,
    G1,
    G2,
    G3,
}

impl Criterion {
    pub fn is_blowup(&self) -> bool {
        matches!(self, Criterion::B1)
    }
}

/// A criterion that holds, with the compared quantity and its bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiredCriterion {
    pub criterion: Criterion,
    pub quantity: &'static str,
    pub value: f64,
    pub relation: &'static str,
    pub threshold: f64,
}

/// Data classified by [`classify`]: the two moments of `F₀` that enter the
/// criteria plus the cosmological initial values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InitialSummary {
    #[serde(rename = "N")]
    pub n: f64,
    pub rho0: f64,
    pub a0: f64,
    #[serde(rename = "H0")]
    pub h0: f64,
    pub phi0: f64,
    pub sigma: f64,
    pub k: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeVerdict {
    pub verdict: Verdict,
    pub fired_criteria: Vec<FiredCriterion>,
    /// `φ₀ ≥ φ_m` for `k = 1`. Only a hint: the theorem constrains the limit
    /// of `φ`, which is smaller than `φ₀`.
    pub criteria2_candidate: bool,
    #[serde(rename = "Sigma0")]
    pub sigma0: f64,
    #[serde(rename = "Phi0")]
    pub phi0_ratio: Option<f64>,
    pub phi_m: Option<f64>,
    pub constraint_residual: f64,
    pub input: InitialSummary,
}

pub fn check_curvature(k: i32) -> Result<()> {
    if matches!(k, -1..=1) {
        Ok(())
    } else {
        Err(Error::param("k", format!("must be -1, 0 or 1, got {k}")))
    }
}

/// `φ₀` below this value forces finite-time blow-up.
///
/// `σN/(H₀a₀³)` for `k ≤ 0`; for `k = 1`
/// `(9σN²/(4a₀³))·√(π/2)·erfc(x)·e^{x²}` with `x = 9H₀N/(4√2)`.
pub fn blowup_threshold(sigma: f64, n: f64, h0: f64, a0: f64, k: i32) -> Result<f64> {
    check_curvature(k)?;
    if !(h0 > 0.0) {
        return Err(Error::param("H0", format!("must be > 0, got {h0}")));
    }
    if !(a0 > 0.0) {
        return Err(Error::param("a0", format!("must be > 0, got {a0}")));
    }
    if !(n >= 0.0) || !(sigma >= 0.0) {
        return Err(Error::param("sigma", "sigma and N must be >= 0"));
    }
    let a3 = a0 * a0 * a0;
    if k == 1 {
        let x = 9.0 * h0 * n / (4.0 * std::f64::consts::SQRT_2);
        Ok(9.0 * sigma * n * n / (4.0 * a3) * scaled_gaussian_tail(x))
    } else {
        Ok(sigma * n / (h0 * a3))
    }
}

/// `(3/(β²a₀²))[k₊ + 3(σN/6)^{2/3}]`.
pub fn g3_threshold(sigma: f64, n: f64, a0: f64, k: i32, beta: f64) -> f64 {
    let kp = k.max(0) as f64;
    3.0 / (beta * beta * a0 * a0) * (kp + 3.0 * (sigma * n / 6.0).powf(2.0 / 3.0))
}

/// Classifies with the β→1 limit of the unified global criterion.
pub fn classify(input: &InitialSummary) -> Result<RegimeVerdict> {
    classify_with_beta(input, None)
}

/// As [`classify`]; `Some(β)` with `β ∈ (0,1)` tests the unified global
/// criterion at that β instead of the limit.
pub fn classify_with_beta(input: &InitialSummary, beta: Option<f64>) -> Result<RegimeVerdict> {
    let &InitialSummary { n, rho0, a0, h0, phi0, sigma, k } = input;
    check_curvature(k)?;
    for (name, v) in [("N", n), ("rho0", rho0), ("sigma", sigma)] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::param(name, format!("must be finite and >= 0, got {v}")));
        }
    }
    if !(a0 > 0.0) || !(h0 > 0.0) || !(phi0 > 0.0) {
        return Err(Error::Regime(format!(
            "initial data need a0 > 0, H0 > 0, phi0 > 0 (got {a0}, {h0}, {phi0})"
        )));
    }
    if let Some(b) = beta {
        if !(b > 0.0 && b < 1.0) {
            return Err(Error::param("beta", format!("must lie in (0, 1), got {b}")));
        }
    }
    let residual = normalized_constraint(h0, a0, rho0, phi0, k);
    if residual.abs() > CONSTRAINT_TOLERANCE {
        return Err(Error::Regime(format!(
            "initial data violate H0² = (rho0 + phi0)/3 − k/a0² (normalized residual {residual:e})"
        )));
    }

    let a3 = a0.powi(3);
    let mut fired = Vec::new();

    let b1 = blowup_threshold(sigma, n, h0, a0, k)?;
    if phi0 < b1 {
        fired.push(FiredCriterion {
            criterion: Criterion::B1,
            quantity: "phi0",
            value: phi0,
            relation: "<",
            threshold: b1,
        });
    }
    if k <= 0 {
        let g1 = 3.0 * sigma * n / (h0 * a3);
        if phi0 >= g1 {
            fired.push(FiredCriterion {
                criterion: Criterion::G1,
                quantity: "phi0",
                value: phi0,
                relation: ">=",
                threshold: g1,
            });
        }
    } else {
        let ratio = 3.0 * sigma / h0;
        let energy = rho0 * a0 * a0;
        let (relation, bound, holds) = if ratio <= 1.0 {
            ("<", 1.5, energy < 1.5)
        } else {
            let s = h0 / (3.0 * sigma);
            let bound = 1.5 * s * (1.0 - s).exp();
            ("<=", bound, energy <= bound)
        };
        if holds {
            fired.push(FiredCriterion {
                criterion: Criterion::G2,
                quantity: "rho0*a0^2",
                value: energy,
                relation,
                threshold: bound,
            });
        }
    }
    let (g3, g3_holds, g3_rel) = match beta {
        None => {
            let t = g3_threshold(sigma, n, a0, k, 1.0);
            (t, phi0 > t, ">")
        }
        Some(b) => {
            let t = g3_threshold(sigma, n, a0, k, b);
            (t, phi0 >= t, ">=")
        }
    };
    if g3_holds {
        fired.push(FiredCriterion {
            criterion: Criterion::G3,
            quantity: "phi0",
            value: phi0,
            relation: g3_rel,
            threshold: g3,
        });
    }

    let blowup = fired.iter().any(|c| c.criterion.is_blowup());
    let global = fired.iter().any(|c| !c.criterion.is_blowup());
    let verdict = match (blowup, global) {
        (true, true) => {
            return Err(Error::Regime(format!(
                "blow-up and global criteria fired together: {:?}",
                fired.iter().map(|c| c.criterion).collect::<Vec<_>>()
            )))
        }
        (true, false) => Verdict::BlowupGuaranteed,
        (false, true) => Verdict::GlobalGuaranteed,
        (false, false) => Verdict::Undetermined,
    };

    let phi_m = (4.0 / (n * n)).min(9.0 / (4.0 * rho0 * a0.powi(4)));
    let phi_m = phi_m.is_finite().then_some(phi_m);
    Ok(RegimeVerdict {
        verdict,
        fired_criteria: fired,
        criteria2_candidate: k == 1 && phi_m.is_some_and(|m| phi0 >= m),
        sigma0: sigma / h0,
        phi0_ratio: (rho0 > 0.0).then(|| phi0 / rho0),
        phi_m,
        constraint_residual: residual,
        input: *input,
    })
}

/// `3Σ₀ < Φ₀ < 1/2`: inside this window the solution is global and the
/// expansion turns from decelerated to accelerated.
pub fn deceleration_window(sigma0: f64, phi0_ratio: f64, k: i32) -> Result<bool> {
    check_curvature(k)?;
    if k == 1 {
        return Err(Error::param("k", "the deceleration window only covers k = 0 and k = -1"));
    }
    Ok(3.0 * sigma0 < phi0_ratio && phi0_ratio < 0.5)
}
