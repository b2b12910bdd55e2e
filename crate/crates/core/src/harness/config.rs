//! INI run configuration.
//!
//! ```ini
//! [model]
//! sigma = 0.1
//! k = 0
//!
//! [initial]
//! profile = gaussian      ; gaussian | ball | zero
//! amplitude = 1.0         ; or N = ... and rho0 = ... for a calibrated gaussian
//! width = 1.0             ; radius = ... for ball
//! a0 = 1.0
//! H0 = 1.0
//! solve_phi0 = true       ; or phi0 = ..., optionally with solve_H0 = true
//!
//! [numerics]
//! t_end = 10
//!
//! [output]
//! dir = out
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;

use ini::Ini;

use crate::dynamics::{Closure, GridSpec, InitialSpec, ModelParams, ProfileSpec};
use crate::error::{Error, Result};
use crate::grid::Profile;
use crate::regime::check_curvature;

pub const DEFAULT_N_CELLS: usize = 3600;
pub const DEFAULT_R_MAX: f64 = 1e16;
pub const DEFAULT_STRETCH: f64 = 1.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub formats: Vec<Format>,
}

impl OutputConfig {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| if i + 1 == self.count { self.max } else { self.min + step * i as f64 })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub phi0: Range,
    pub sigma: Range,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub grid: GridSpec,
    pub profile: ProfileSpec,
    pub a0: f64,
    /// `None` only for sweep configs, where `φ₀` comes from the sweep range
    /// and `H₀` is solved per cell.
    pub closure: Option<Closure>,
    pub output: OutputConfig,
    pub sweep: Option<SweepConfig>,
}

impl RunConfig {
    pub fn initial_spec(&self) -> Result<InitialSpec> {
        let closure = self
            .closure
            .ok_or_else(|| Error::Config("no closure mode: set phi0 and/or H0".into()))?;
        Ok(InitialSpec { grid: self.grid, profile: self.profile, a0: self.a0, closure })
    }

    /// Initial data for a sweep cell: the configured profile with `φ₀`
    /// given and `H₀` solved from the constraint.
    pub fn sweep_spec(&self, phi0: f64) -> InitialSpec {
        InitialSpec {
            grid: self.grid,
            profile: self.profile,
            a0: self.a0,
            closure: Closure::SolveH0 { phi0 },
        }
    }
}

const KNOWN: &[(&str, &[&str])] = &[
    ("model", &["sigma", "k"]),
    (
        "initial",
        &[
            "profile", "amplitude", "width", "radius", "N", "rho0", "a0", "H0", "phi0", "solve_phi0",
            "solve_H0",
        ],
    ),
    (
        "numerics",
        &["n_cells", "r_max", "stretch", "eta", "dt_max", "a_floor", "H_ceiling", "t_end"],
    ),
    ("output", &["dir", "cadence", "formats"]),
    ("sweep", &["phi0_min", "phi0_max", "phi0_count", "sigma_min", "sigma_max", "sigma_count"]),
];

struct Table {
    values: BTreeMap<(String, String), String>,
}

impl Table {
    fn raw(&self, section: &str, key: &str) -> Option<&str> {
        self.values.get(&(section.to_string(), key.to_string())).map(String::as_str)
    }

    fn has(&self, section: &str, key: &str) -> bool {
        self.raw(section, key).is_some()
    }

    fn has_section(&self, section: &str) -> bool {
        self.values.keys().any(|(s, _)| s == section)
    }

    fn typed<T: std::str::FromStr>(&self, section: &str, key: &str, kind: &str) -> Result<Option<T>> {
        match self.raw(section, key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| {
                Error::Config(format!("[{section}] {key}: expected {kind}, got `{v}`"))
            }),
        }
    }

    fn f64(&self, section: &str, key: &str) -> Result<Option<f64>> {
        let v = self.typed::<f64>(section, key, "a number")?;
        if let Some(x) = v {
            if !x.is_finite() {
                return Err(Error::Config(format!("[{section}] {key}: must be finite")));
            }
        }
        Ok(v)
    }

    fn req_f64(&self, section: &str, key: &str) -> Result<f64> {
        self.f64(section, key)?
            .ok_or_else(|| Error::Config(format!("missing key [{section}] {key}")))
    }

    fn bool(&self, section: &str, key: &str) -> Result<bool> {
        Ok(self.typed::<bool>(section, key, "true or false")?.unwrap_or(false))
    }
}

fn positive(section: &str, key: &str, v: f64) -> Result<f64> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(Error::Config(format!("[{section}] {key}: must be > 0, got {v}")))
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let ini = Ini::load_from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let mut values = BTreeMap::new();
    for (section, props) in ini.iter() {
        let Some(section) = section else {
            if let Some((key, _)) = props.iter().next() {
                return Err(Error::Config(format!("key `{key}` outside any section")));
            }
            continue;
        };
        let Some((_, keys)) = KNOWN.iter().find(|(s, _)| *s == section) else {
            return Err(Error::Config(format!("unknown section [{section}]")));
        };
        for (key, value) in props.iter() {
            if !keys.contains(&key) {
                return Err(Error::Config(format!("unknown key `{key}` in [{section}]")));
            }
            if values.insert((section.to_string(), key.to_string()), value.trim().to_string()).is_some() {
                return Err(Error::Config(format!("duplicate key `{key}` in [{section}]")));
            }
        }
    }
    let t = Table { values };

    let sigma = t.req_f64("model", "sigma")?;
    if sigma < 0.0 {
        return Err(Error::Config(format!("[model] sigma: must be >= 0, got {sigma}")));
    }
    let k = t
        .typed::<i32>("model", "k", "an integer")?
        .ok_or_else(|| Error::Config("missing key [model] k".into()))?;
    check_curvature(k).map_err(|_| Error::Config(format!("[model] k: must be -1, 0 or 1, got {k}")))?;

    let mut params = ModelParams::new(sigma, k, t.req_f64("numerics", "t_end")?);
    if params.t_end < 0.0 {
        return Err(Error::Config(format!("[numerics] t_end: must be >= 0, got {}", params.t_end)));
    }
    if let Some(v) = t.f64("numerics", "eta")? {
        params.eta = positive("numerics", "eta", v)?;
    }
    if let Some(v) = t.f64("numerics", "dt_max")? {
        params.dt_max = positive("numerics", "dt_max", v)?;
    }
    if let Some(v) = t.f64("numerics", "a_floor")? {
        params.a_floor = Some(positive("numerics", "a_floor", v)?);
    }
    if let Some(v) = t.f64("numerics", "H_ceiling")? {
        params.h_ceiling = positive("numerics", "H_ceiling", v)?;
    }
    if let Some(v) = t.f64("output", "cadence")? {
        if v < 0.0 {
            return Err(Error::Config(format!("[output] cadence: must be >= 0, got {v}")));
        }
        params.cadence = v;
    }

    let n_cells = t.typed::<usize>("numerics", "n_cells", "a positive integer")?.unwrap_or(DEFAULT_N_CELLS);
    let r_max = positive("numerics", "r_max", t.f64("numerics", "r_max")?.unwrap_or(DEFAULT_R_MAX))?;
    let stretch = t.f64("numerics", "stretch")?.unwrap_or(DEFAULT_STRETCH);
    if stretch < 1.0 {
        return Err(Error::Config(format!("[numerics] stretch: must be >= 1, got {stretch}")));
    }
    let grid = GridSpec { n_cells, r_max, stretch };

    let profile = parse_profile(&t)?;
    let a0 = positive("initial", "a0", t.req_f64("initial", "a0")?)?;
    let sweep = parse_sweep(&t)?;
    let closure = parse_closure(&t, sweep.is_some())?;

    let dir = PathBuf::from(t.raw("output", "dir").unwrap_or("out"));
    let formats = match t.raw("output", "formats") {
        None => vec![Format::Csv, Format::Json],
        Some(list) => list
            .split(',')
            .map(|f| match f.trim() {
                "csv" => Ok(Format::Csv),
                "json" => Ok(Format::Json),
                other => Err(Error::Config(format!("[output] formats: unknown format `{other}`"))),
            })
            .collect::<Result<Vec<_>>>()?,
    };

    Ok(RunConfig {
        params,
        grid,
        profile,
        a0,
        closure,
        output: OutputConfig { dir, formats },
        sweep,
    })
}

fn parse_profile(t: &Table) -> Result<ProfileSpec> {
    let name = t
        .raw("initial", "profile")
        .ok_or_else(|| Error::Config("missing key [initial] profile".into()))?;
    let allowed: &[&str] = match name {
        "gaussian" => &["amplitude", "width", "N", "rho0"],
        "ball" => &["amplitude", "radius"],
        "zero" => &[],
        other => {
            return Err(Error::Config(format!(
                "[initial] profile: expected gaussian, ball or zero, got `{other}`"
            )))
        }
    };
    for key in ["amplitude", "width", "radius", "N", "rho0"] {
        if t.has("initial", key) && !allowed.contains(&key) {
            return Err(Error::Config(format!("[initial] {key} does not apply to profile {name}")));
        }
    }
    match name {
        "gaussian" => {
            let explicit = t.has("initial", "amplitude") || t.has("initial", "width");
            let calibrated = t.has("initial", "N") || t.has("initial", "rho0");
            match (explicit, calibrated) {
                (true, true) => Err(Error::Config(
                    "[initial] give either amplitude/width or N/rho0 for a gaussian, not both".into(),
                )),
                (false, true) => Ok(ProfileSpec::CalibratedGaussian {
                    n: positive("initial", "N", t.req_f64("initial", "N")?)?,
                    rho0: positive("initial", "rho0", t.req_f64("initial", "rho0")?)?,
                }),
                _ => Ok(ProfileSpec::Explicit(Profile::Gaussian {
                    amplitude: positive("initial", "amplitude", t.req_f64("initial", "amplitude")?)?,
                    width: positive("initial", "width", t.req_f64("initial", "width")?)?,
                })),
            }
        }
        "ball" => Ok(ProfileSpec::Explicit(Profile::Ball {
            amplitude: positive("initial", "amplitude", t.req_f64("initial", "amplitude")?)?,
            radius: positive("initial", "radius", t.req_f64("initial", "radius")?)?,
        })),
        _ => Ok(ProfileSpec::Explicit(Profile::Zero)),
    }
}

fn parse_closure(t: &Table, sweep: bool) -> Result<Option<Closure>> {
    let phi0 = t.f64("initial", "phi0")?;
    let h0 = t.f64("initial", "H0")?;
    let solve_phi0 = t.bool("initial", "solve_phi0")?;
    let solve_h0 = t.bool("initial", "solve_H0")?;
    let one_mode = || Error::Config("exactly one closure mode: phi0 with H0, solve_phi0 = true with H0, or solve_H0 = true with phi0".into());
    if sweep {
        if phi0.is_some() || solve_phi0 || h0.is_some() {
            return Err(Error::Config(
                "sweep configs take phi0 from [sweep] and solve H0 per cell; drop phi0, H0 and solve_phi0".into(),
            ));
        }
        return Ok(None);
    }
    match (solve_phi0, solve_h0) {
        (true, true) => Err(one_mode()),
        (true, false) => {
            if phi0.is_some() {
                return Err(one_mode());
            }
            let h0 = h0.ok_or_else(|| Error::Config("missing key [initial] H0 (needed by solve_phi0)".into()))?;
            Ok(Some(Closure::SolvePhi0 { h0 }))
        }
        (false, true) => {
            if h0.is_some() {
                return Err(one_mode());
            }
            let phi0 = phi0.ok_or_else(|| Error::Config("missing key [initial] phi0 (needed by solve_H0)".into()))?;
            Ok(Some(Closure::SolveH0 { phi0 }))
        }
        (false, false) => match (h0, phi0) {
            (Some(h0), Some(phi0)) => Ok(Some(Closure::Check { h0, phi0 })),
            (None, _) => Err(Error::Config("missing key [initial] H0".into())),
            (_, None) => Err(Error::Config("missing key [initial] phi0".into())),
        },
    }
}

fn parse_range(t: &Table, name: &str) -> Result<Range> {
    let min = t.req_f64("sweep", &format!("{name}_min"))?;
    let max = t.req_f64("sweep", &format!("{name}_max"))?;
    let count = t
        .typed::<usize>("sweep", &format!("{name}_count"), "a positive integer")?
        .ok_or_else(|| Error::Config(format!("missing key [sweep] {name}_count")))?;
    if count == 0 || max < min || (count == 1 && max != min) {
        return Err(Error::Config(format!(
            "[sweep] empty or inconsistent {name} range: min {min}, max {max}, count {count}"
        )));
    }
    Ok(Range { min, max, count })
}

fn parse_sweep(t: &Table) -> Result<Option<SweepConfig>> {
    if !t.has_section("sweep") {
        return Ok(None);
    }
    let phi0 = parse_range(t, "phi0")?;
    let sigma = parse_range(t, "sigma")?;
    if phi0.min <= 0.0 || sigma.min < 0.0 {
        return Err(Error::Config("[sweep] phi0 must be > 0 and sigma >= 0".into()));
    }
    Ok(Some(SweepConfig { phi0, sigma }))
}

#[cfg(test)]
mod tests {
    use super::*;

    const VACUUM: &str = "[model]\nsigma = 0\nk = 0\n[initial]\nprofile = zero\na0 = 1\nH0 = 1\nsolve_phi0 = true\n[numerics]\nt_end = 5\n";

    #[test]
    fn minimal_vacuum_defaults() {
        let c = parse_config(VACUUM).unwrap();
        assert_eq!(c.closure, Some(Closure::SolvePhi0 { h0: 1.0 }));
        assert_eq!(c.params.eta, 1e-3);
        assert_eq!(c.params.h_ceiling, 1e8);
        assert_eq!(c.params.a_floor, None);
        assert_eq!(c.grid.n_cells, DEFAULT_N_CELLS);
        assert_eq!(c.output.formats, vec![Format::Csv, Format::Json]);
        assert!(c.sweep.is_none());
    }

    #[test]
    fn inline_comments_are_stripped() {
        let c = parse_config(&VACUUM.replace("t_end = 5", "t_end = 5   # short run")).unwrap();
        assert_eq!(c.params.t_end, 5.0);
    }

    #[test]
    fn rejects_bad_curvature() {
        let err = parse_config(&VACUUM.replace("k = 0", "k = 2")).unwrap_err();
        assert!(err.to_string().contains("k"), "{err}");
    }

    #[test]
    fn rejects_two_closures() {
        let text = VACUUM.replace("solve_phi0 = true", "solve_phi0 = true\nphi0 = 3");
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("exactly one closure mode"), "{err}");
    }

    #[test]
    fn rejects_unknown_and_mistyped_keys() {
        assert!(parse_config(&VACUUM.replace("t_end = 5", "t_end = 5\ntend = 3")).is_err());
        assert!(parse_config(&VACUUM.replace("t_end = 5", "t_end = five")).is_err());
        assert!(parse_config(&format!("{VACUUM}[extra]\nx = 1\n")).is_err());
        assert!(parse_config(&VACUUM.replace("[numerics]\nt_end = 5\n", "")).is_err());
    }

    #[test]
    fn closure_modes() {
        let check = VACUUM.replace("solve_phi0 = true", "phi0 = 3");
        assert_eq!(parse_config(&check).unwrap().closure, Some(Closure::Check { h0: 1.0, phi0: 3.0 }));
        let solve_h = VACUUM.replace("H0 = 1\nsolve_phi0 = true", "phi0 = 3\nsolve_H0 = true");
        assert_eq!(parse_config(&solve_h).unwrap().closure, Some(Closure::SolveH0 { phi0: 3.0 }));
    }

    #[test]
    fn calibrated_gaussian() {
        let text = VACUUM.replace("profile = zero", "profile = gaussian\nN = 1\nrho0 = 2.95");
        let c = parse_config(&text).unwrap();
        assert_eq!(c.profile, ProfileSpec::CalibratedGaussian { n: 1.0, rho0: 2.95 });
        let mixed = VACUUM.replace("profile = zero", "profile = gaussian\nN = 1\nrho0 = 2\nwidth = 1");
        assert!(parse_config(&mixed).is_err());
    }

    #[test]
    fn sweep_ranges() {
        let text = VACUUM.replace("H0 = 1\nsolve_phi0 = true\n", "")
            + "[sweep]\nphi0_min = 0.1\nphi0_max = 0.3\nphi0_count = 3\nsigma_min = 0.1\nsigma_max = 0.1\nsigma_count = 1\n";
        let c = parse_config(&text).unwrap();
        let s = c.sweep.unwrap();
        assert_eq!(s.phi0.values(), vec![0.1, 0.2, 0.3]);
        assert_eq!(s.sigma.values(), vec![0.1]);
        assert!(c.closure.is_none());
        assert!(parse_config(&text.replace("phi0_count = 3", "phi0_count = 0")).is_err());
    }
}
