//! Radial momentum grids and isotropic distributions sampled on them.
//!
//! Cells are finite volumes in `r = |v|` with faces `r_{1/2} = 0 < … < r_{n+1/2} = r_max`.
//! Every cell carries the midpoint quadrature weight `r_i² Δr_i`; the same
//! weights define the discrete particle number conserved by the diffusion step,
//! so `N = 4π Σ F_i r_i² Δr_i` is exact at the discrete level.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::special::erfc;

pub const MIN_CELLS: usize = 8;

/// Allowed negative undershoot relative to `max F`.
pub const UNDERSHOOT_TOLERANCE: f64 = 1e-12;

/// Largest admissible analytic tail mass fraction beyond `r_max` at setup.
pub const MAX_INITIAL_TAIL_FRACTION: f64 = 1e-12;

/// Last-cell mass fraction that raises the truncation warning during a run.
pub const TAIL_WARNING_FRACTION: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    faces: Vec<f64>,
    centers: Vec<f64>,
    weights: Vec<f64>,
    /// `W_i = Σ_{j≤i} weights[j]`.
    cumulative: Vec<f64>,
    stretch: f64,
}

impl RadialGrid {
    /// Uniform grid with `Δr = r_max / n_cells`.
    pub fn uniform(n_cells: usize, r_max: f64) -> Result<Self> {
        check_layout(n_cells, r_max)?;
        let dr = r_max / n_cells as f64;
        let mut faces: Vec<f64> = (0..=n_cells).map(|i| i as f64 * dr).collect();
        faces[n_cells] = r_max;
        Ok(Self::from_faces(faces, 1.0))
    }

    /// Uniform core followed by geometrically growing cells.
    ///
    /// The core holds `m = round(1/(ratio−1))` cells of width `h`; cell `m+j`
    /// has width `h·ratio^{j+1}`. At the junction `Δr/r ≈ ratio − 1`, so the
    /// relative resolution is continuous. `h` is chosen so the last face lands
    /// on `r_max`. `ratio = 1` gives [`RadialGrid::uniform`].
    pub fn stretched(n_cells: usize, r_max: f64, ratio: f64) -> Result<Self> {
        check_layout(n_cells, r_max)?;
        if !(ratio >= 1.0) || !ratio.is_finite() {
            return Err(Error::Grid(format!("stretch ratio must be >= 1, got {ratio}")));
        }
        if ratio == 1.0 {
            return Self::uniform(n_cells, r_max);
        }
        let core = ((1.0 / (ratio - 1.0)).round() as usize).clamp(1, n_cells);
        let outer = n_cells - core;
        let outer_sum = ratio * (ratio.powi(outer as i32) - 1.0) / (ratio - 1.0);
        let h = r_max / (core as f64 + outer_sum);
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::Grid(format!(
                "stretched layout degenerate for n = {n_cells}, r_max = {r_max}, ratio = {ratio}"
            )));
        }
        let mut faces = Vec::with_capacity(n_cells + 1);
        faces.push(0.0);
        let mut r = 0.0;
        for i in 0..n_cells {
            let width = if i < core {
                h
            } else {
                h * ratio.powi((i - core + 1) as i32)
            };
            r += width;
            faces.push(r);
        }
        faces[n_cells] = r_max;
        if faces.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Grid("faces not strictly increasing".into()));
        }
        Ok(Self::from_faces(faces, ratio))
    }

    fn from_faces(faces: Vec<f64>, stretch: f64) -> Self {
        let centers: Vec<f64> = faces.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let weights: Vec<f64> = faces
            .windows(2)
            .zip(&centers)
            .map(|(w, &r)| r * r * (w[1] - w[0]))
            .collect();
        let cumulative = weights
            .iter()
            .scan(0.0, |acc, &w| {
                *acc += w;
                Some(*acc)
            })
            .collect();
        Self {
            faces,
            centers,
            weights,
            cumulative,
            stretch,
        }
    }

    pub fn n_cells(&self) -> usize {
        self.centers.len()
    }

    pub fn r_max(&self) -> f64 {
        self.faces[self.faces.len() - 1]
    }

    pub fn faces(&self) -> &[f64] {
        &self.faces
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    /// Midpoint weights `r_i² Δr_i`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Running sums of [`RadialGrid::weights`].
    pub fn cumulative_weights(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn width(&self, i: usize) -> f64 {
        self.faces[i + 1] - self.faces[i]
    }

    pub fn stretch(&self) -> f64 {
        self.stretch
    }

    pub fn is_uniform(&self) -> bool {
        self.stretch == 1.0
    }
}

fn check_layout(n_cells: usize, r_max: f64) -> Result<()> {
    if n_cells < MIN_CELLS {
        return Err(Error::Grid(format!(
            "need at least {MIN_CELLS} cells, got {n_cells}"
        )));
    }
    if !(r_max > 0.0) || !r_max.is_finite() {
        return Err(Error::Grid(format!("r_max must be positive, got {r_max}")));
    }
    Ok(())
}

/// Uniform radial grid; see [`RadialGrid::uniform`].
pub fn build_grid(n_cells: usize, r_max: f64) -> Result<RadialGrid> {
    RadialGrid::uniform(n_cells, r_max)
}

/// Named initial profiles `F₀(r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    /// `A·exp(−r²/w²)`
    Gaussian { amplitude: f64, width: f64 },
    /// `A` for `r ≤ r₀`, zero beyond.
    Ball { amplitude: f64, radius: f64 },
    Zero,
}

impl Profile {
    pub fn name(&self) -> &'static str {
        match self {
            Profile::Gaussian { .. } => "gaussian",
            Profile::Ball { .. } => "ball",
            Profile::Zero => "zero",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Profile(format!("{name} must be positive, got {v}")))
            }
        };
        match *self {
            Profile::Gaussian { amplitude, width } => {
                positive("amplitude", amplitude)?;
                positive("width", width)
            }
            Profile::Ball { amplitude, radius } => {
                positive("amplitude", amplitude)?;
                positive("radius", radius)
            }
            Profile::Zero => Ok(()),
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            Profile::Gaussian { amplitude, width } => amplitude * (-(r * r) / (width * width)).exp(),
            Profile::Ball { amplitude, radius } => {
                if r <= radius {
                    amplitude
                } else {
                    0.0
                }
            }
            Profile::Zero => 0.0,
        }
    }

    /// Exact `4π∫₀^∞ F r² dr`.
    pub fn exact_number(&self) -> f64 {
        match *self {
            Profile::Gaussian { amplitude, width } => amplitude * PI.powf(1.5) * width.powi(3),
            Profile::Ball { amplitude, radius } => amplitude * 4.0 * PI / 3.0 * radius.powi(3),
            Profile::Zero => 0.0,
        }
    }

    /// Fraction of the exact particle number lying beyond `r_cut`.
    pub fn tail_fraction(&self, r_cut: f64) -> f64 {
        match *self {
            Profile::Gaussian { width, .. } => gaussian_tail_fraction(r_cut / width),
            Profile::Ball { radius, .. } => {
                if r_cut >= radius {
                    0.0
                } else {
                    1.0 - (r_cut / radius).powi(3)
                }
            }
            Profile::Zero => 0.0,
        }
    }
}

/// `∫_{s}^∞ x² e^{−x²} dx / ∫_0^∞ x² e^{−x²} dx` for `s = R/w`.
pub fn gaussian_tail_fraction(s: f64) -> f64 {
    erfc(s) + 2.0 * s / PI.sqrt() * (-s * s).exp()
}

/// Cell-centred samples of an isotropic distribution. Immutable; the grid is
/// shared between snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialDistribution {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl RadialDistribution {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_cells() {
            return Err(Error::Grid(format!(
                "{} values for {} cells",
                values.len(),
                grid.n_cells()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("distribution"));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let values = vec![0.0; grid.n_cells()];
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// `Σ F_i r_i² Δr_i` (particle number without the 4π).
    pub fn weighted_sum(&self) -> f64 {
        self.values
            .iter()
            .zip(self.grid.weights())
            .map(|(f, w)| f * w)
            .sum()
    }

    /// Share of the discrete particle number held by the outermost cell.
    pub fn tail_mass_fraction(&self) -> f64 {
        let total = self.weighted_sum();
        if total <= 0.0 {
            return 0.0;
        }
        let last = self.values.len() - 1;
        (self.values[last] * self.grid.weights()[last]).abs() / total
    }
}

/// Samples `profile` at the cell centres of `grid`.
///
/// Rejects non-positive profile parameters and profiles whose exact mass
/// beyond `r_max` exceeds [`MAX_INITIAL_TAIL_FRACTION`].
pub fn sample_profile(profile: &Profile, grid: &Arc<RadialGrid>) -> Result<RadialDistribution> {
    profile.validate()?;
    let tail = profile.tail_fraction(grid.r_max());
    if tail >= MAX_INITIAL_TAIL_FRACTION {
        return Err(Error::Profile(format!(
            "{} profile loses a fraction {tail:e} of its mass beyond r_max = {}",
            profile.name(),
            grid.r_max()
        )));
    }
    let values = grid.centers().iter().map(|&r| profile.eval(r)).collect();
    RadialDistribution::new(Arc::clone(grid), values)
}
