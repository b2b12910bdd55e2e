#![allow(dead_code)]

use evfp::dynamics::{Closure, GridSpec, InitialSpec, ProfileSpec};
use evfp::harness::config::{DEFAULT_N_CELLS, DEFAULT_R_MAX, DEFAULT_STRETCH};

pub fn default_grid() -> GridSpec {
    GridSpec { n_cells: DEFAULT_N_CELLS, r_max: DEFAULT_R_MAX, stretch: DEFAULT_STRETCH }
}

/// Calibrated gaussian with `N = 1`, `a₀ = H₀ = 1` and the given `φ₀`; `ρ₀` closes the constraint.
pub fn flat_gaussian(phi0: f64) -> InitialSpec {
    InitialSpec {
        grid: default_grid(),
        profile: ProfileSpec::CalibratedGaussian { n: 1.0, rho0: 3.0 - phi0 },
        a0: 1.0,
        closure: Closure::Check { h0: 1.0, phi0 },
    }
}

/// Adaptive Simpson on `[a, b]` with absolute tolerance `tol`.
pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// `erfc(x) = 2/√π ∫ₓ^∞ e^{−t²} dt`, truncated where the integrand is below `e^{−144}`.
pub fn erfc_oracle(x: f64) -> f64 {
    let g = |t: f64| (-t * t).exp();
    let upper = 12.0;
    // Split at 0 so the peak of the integrand is a node.
    let s = if x < 0.0 {
        simpson(&g, x, 0.0, 1e-14) + simpson(&g, 0.0, upper, 1e-14)
    } else {
        simpson(&g, x, upper, 1e-14)
    };
    2.0 / std::f64::consts::PI.sqrt() * s
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
