//! Explicit Euler reference for the full three-dimensional operator
//! `σa ∂ᵢ(Dⁱʲ ∂ⱼF)` with `Dⁱʲ = (a²δⁱʲ + vⁱvʲ)/√(a²+|v|²)`.
//!
//! Only meant for validating the radial solver on small grids.

use super::FpStepParams;
use crate::error::{Error, Result};

/// Cell-centred field on the cube `[−L, L]³` with `n` cells per side.
#[derive(Debug, Clone, PartialEq)]
pub struct Field3 {
    n: usize,
    half_width: f64,
    values: Vec<f64>,
}

impl Field3 {
    pub const MAX_SIDE: usize = 64;

    pub fn from_fn(n: usize, half_width: f64, f: impl Fn(f64, f64, f64) -> f64) -> Result<Self> {
        if !(2..=Self::MAX_SIDE).contains(&n) {
            return Err(Error::Grid(format!("cartesian side must be in 2..={}, got {n}", Self::MAX_SIDE)));
        }
        if !(half_width > 0.0) {
            return Err(Error::Grid(format!("half width must be positive, got {half_width}")));
        }
        let mut field = Self {
            n,
            half_width,
            values: vec![0.0; n * n * n],
        };
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let idx = field.index(i, j, k);
                    field.values[idx] = f(field.coord(i), field.coord(j), field.coord(k));
                }
            }
        }
        Ok(field)
    }

    pub fn side(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 0.5) * self.spacing()
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.index(i, j, k)]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest stable `dt` for the explicit update.
    pub fn stable_dt(&self, sigma: f64, a: f64) -> f64 {
        let r2 = 3.0 * self.half_width * self.half_width;
        let h = self.spacing();
        h * h / (12.0 * sigma * a * (a * a + r2).sqrt())
    }
}

/// One explicit Euler step of the Cartesian operator in flux form.
///
/// Face fluxes use the face-normal difference for the diagonal term and the
/// average of the two neighbouring central differences for the cross terms;
/// fluxes through the outer cube faces vanish.
pub fn fp_step_cartesian_oracle(f: &Field3, p: &FpStepParams) -> Result<Field3> {
    p.validate()?;
    if p.sigma == 0.0 {
        return Ok(f.clone());
    }
    let limit = f.stable_dt(p.sigma, p.a);
    if p.dt > limit {
        return Err(Error::param(
            "dt",
            format!("explicit step {} exceeds stability bound {limit}", p.dt),
        ));
    }
    let n = f.n;
    let h = f.spacing();
    let a2 = p.a * p.a;
    let last = n - 1;
    let at = |c: [usize; 3]| f.get(c[0], c[1], c[2]);
    // central difference along `axis` at cell `c`, one-sided clamped at the walls
    let central = |c: [usize; 3], axis: usize| {
        let mut lo = c;
        let mut hi = c;
        lo[axis] = c[axis].saturating_sub(1);
        hi[axis] = (c[axis] + 1).min(last);
        (at(hi) - at(lo)) / ((hi[axis] - lo[axis]) as f64 * h)
    };
    // flux through the face between `c` and its +axis neighbour
    let flux = |c: [usize; 3], axis: usize| {
        let mut d = c;
        d[axis] += 1;
        let mut v = [f.coord(c[0]), f.coord(c[1]), f.coord(c[2])];
        v[axis] += 0.5 * h;
        let e = (a2 + v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let mut j = 0.0;
        for b in 0..3 {
            let grad = if b == axis {
                (at(d) - at(c)) / h
            } else {
                0.5 * (central(c, b) + central(d, b))
            };
            let diff = if b == axis { a2 + v[axis] * v[axis] } else { v[axis] * v[b] };
            j += diff / e * grad;
        }
        j
    };
    let scale = p.sigma * p.a * p.dt / h;
    let mut out = f.clone();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let c = [i, j, k];
                let mut div = 0.0;
                for axis in 0..3 {
                    if c[axis] < last {
                        div += flux(c, axis);
                    }
                    if c[axis] > 0 {
                        let mut m = c;
                        m[axis] -= 1;
                        div -= flux(m, axis);
                    }
                }
                let idx = f.index(i, j, k);
                out.values[idx] += scale * div;
            }
        }
    }
    if out.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("cartesian field"));
    }
    Ok(out)
}
