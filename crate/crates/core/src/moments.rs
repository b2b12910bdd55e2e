//! Velocity-space integrals of an isotropic distribution.
//!
//! All integrals use the midpoint rule on the grid's cell weights, so the
//! particle number here is the same discrete quantity conserved by
//! [`crate::fokker_planck::fp_step`].

use std::f64::consts::PI;

use serde::Serialize;

use crate::grid::RadialDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentSet {
    #[serde(rename = "N")]
    pub n: f64,
    pub rho: f64,
    #[serde(rename = "P")]
    pub p: f64,
    pub l2: f64,
    pub q: f64,
    #[serde(rename = "Q")]
    pub deceleration: Option<f64>,
    pub ricci: f64,
}

/// `(4π Σ w F, 4π Σ w F √(a²+r²), 4π Σ w F r²/√(a²+r²))`, all without the `a⁻⁴`.
fn raw_moments(f: &RadialDistribution, a: f64) -> (f64, f64, f64) {
    let grid = f.grid();
    let a2 = a * a;
    let (mut n, mut e, mut p) = (0.0, 0.0, 0.0);
    for ((&v, &w), &r) in f.values().iter().zip(grid.weights()).zip(grid.centers()) {
        if v == 0.0 {
            continue;
        }
        let fw = v * w;
        let en = (a2 + r * r).sqrt();
        n += fw;
        e += fw * en;
        p += fw * (r * r / en);
    }
    (4.0 * PI * n, 4.0 * PI * e, 4.0 * PI * p)
}

/// Discrete particle number `4π Σ F_i r_i² Δr_i`.
pub fn particle_number(f: &RadialDistribution) -> f64 {
    4.0 * PI * f.weighted_sum()
}

/// Energy density and pressure at scale factor `a`.
pub fn energy_pressure(f: &RadialDistribution, a: f64) -> (f64, f64) {
    let (_, e, p) = raw_moments(f, a);
    let a4 = a.powi(4);
    (e / a4, p / (3.0 * a4))
}

/// `(4π Σ w F²)^{1/2}`.
pub fn l2_norm(f: &RadialDistribution) -> f64 {
    let s: f64 = f
        .values()
        .iter()
        .zip(f.grid().weights())
        .map(|(v, w)| v * v * w)
        .sum();
    (4.0 * PI * s).sqrt()
}

pub fn compute_moments(f: &RadialDistribution, a: f64, phi: f64, h: f64) -> MomentSet {
    let (n, e, p) = raw_moments(f, a);
    let a4 = a.powi(4);
    let rho = e / a4;
    let p = p / (3.0 * a4);
    let q = rho + 3.0 * p - 2.0 * phi;
    let deceleration = (h != 0.0).then(|| q / (6.0 * h * h));
    MomentSet {
        n,
        rho,
        p,
        l2: l2_norm(f),
        q,
        deceleration,
        ricci: 4.0 * phi - (rho + 3.0 * p),
    }
}

/// `4π Σ w F (a²+r²)^{γ/2}`.
pub fn gamma_moment(f: &RadialDistribution, a: f64, gamma: f64) -> f64 {
    let grid = f.grid();
    let a2 = a * a;
    let s: f64 = f
        .values()
        .iter()
        .zip(grid.weights())
        .zip(grid.centers())
        .map(|((&v, &w), &r)| {
            if gamma == 1.0 {
                v * w * (a2 + r * r).sqrt()
            } else {
                v * w * (a2 + r * r).powf(0.5 * gamma)
            }
        })
        .sum();
    4.0 * PI * s
}
