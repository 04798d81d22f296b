use std::path::{Path, PathBuf};

use mongelab::model::{PressureSpec, Profile};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Series,
    Implicit,
    Characteristics,
    Extradim,
    All,
}

impl Solver {
    pub fn name(self) -> &'static str {
        match self {
            Solver::Series => "series",
            Solver::Implicit => "implicit",
            Solver::Characteristics => "characteristics",
            Solver::Extradim => "extradim",
            Solver::All => "all",
        }
    }

    pub const CONCRETE: [Solver; 4] = [Solver::Series, Solver::Implicit, Solver::Characteristics, Solver::Extradim];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub profile: Profile,
    pub pressure: PressureSpec,
    pub times: Vec<f64>,
    pub x_range: (f64, f64),
    pub n_samples: usize,
    pub solver: Solver,
    pub order: usize,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub svg: Option<PathBuf>,
    /// Multiplier applied to every verification bound.
    pub tol: f64,
    #[serde(skip)]
    pub inject_g_flip: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            profile: Profile::exponential(1.0, 1.0),
            pressure: PressureSpec::none(),
            times: (0..=8).map(|i| -0.5 + 0.125 * i as f64).collect(),
            x_range: (-4.0, 1.0),
            n_samples: 101,
            solver: Solver::Implicit,
            order: 32,
            output: None,
            format: Format::Csv,
            svg: None,
            tol: 1.0,
            inject_g_flip: false,
        }
    }
}

/// Command-line values that override the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub profile: Option<String>,
    pub pressure: Option<String>,
    pub times: Option<String>,
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub n: Option<usize>,
    pub order: Option<usize>,
    pub solver: Option<Solver>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub svg: Option<PathBuf>,
    pub tol: Option<f64>,
    pub inject_g_flip: bool,
}

impl RunConfig {
    pub fn from_json_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Defaults, then the optional JSON file, then the flags.
    pub fn resolve(file: Option<&Path>, o: &Overrides) -> Result<Self, CliError> {
        let mut cfg = match file {
            Some(p) => Self::from_json_file(p)?,
            None => Self::default(),
        };
        if let Some(s) = &o.profile {
            cfg.profile = parse_profile(s)?;
        }
        if let Some(s) = &o.pressure {
            cfg.pressure = parse_pressure(s)?;
        }
        if let Some(s) = &o.times {
            cfg.times = parse_times(s)?;
        }
        if let Some(v) = o.x_min {
            cfg.x_range.0 = v;
        }
        if let Some(v) = o.x_max {
            cfg.x_range.1 = v;
        }
        if let Some(v) = o.n {
            cfg.n_samples = v;
        }
        if let Some(v) = o.order {
            cfg.order = v;
        }
        if let Some(v) = o.solver {
            cfg.solver = v;
        }
        if let Some(v) = &o.out {
            cfg.output = Some(v.clone());
        }
        if let Some(v) = o.format {
            cfg.format = v;
        }
        if let Some(v) = &o.svg {
            cfg.svg = Some(v.clone());
        }
        if let Some(v) = o.tol {
            cfg.tol = v;
        }
        cfg.inject_g_flip |= o.inject_g_flip;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Config(m.to_string()));
        if self.times.iter().any(|t| !t.is_finite()) {
            return bad("times must be finite");
        }
        if self.n_samples < 2 {
            return bad("n_samples must be at least 2");
        }
        if self.order < 4 {
            return bad("order must be at least 4");
        }
        let (a, b) = self.x_range;
        if !(a.is_finite() && b.is_finite() && a < b) {
            return bad("x_range must be a finite interval with x_min < x_max");
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return bad("tol must be a positive multiplier");
        }
        self.profile.validate().map_err(|e| CliError::Config(format!("model: {e}")))?;
        self.pressure.validate().map_err(|e| CliError::Config(format!("model: {e}")))?;
        Ok(())
    }

    pub fn x_grid(&self) -> Vec<f64> {
        mongelab::numeric::grid(self.x_range.0, self.x_range.1, self.n_samples).collect()
    }
}

fn numbers(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse::<f64>().map_err(|_| CliError::Config(format!("not a number: {p:?}"))))
        .collect()
}

fn split_spec(s: &str) -> (String, Vec<&str>) {
    match s.split_once(':') {
        Some((name, rest)) => (name.trim().to_lowercase(), vec![rest]),
        None => (s.trim().to_lowercase(), vec![]),
    }
}

fn args(rest: &[&str], n: usize, what: &str) -> Result<Vec<f64>, CliError> {
    let v = match rest.first() {
        Some(r) => numbers(r)?,
        None => Vec::new(),
    };
    if v.len() != n {
        return Err(CliError::Config(format!("{what} takes {n} numbers, got {}", v.len())));
    }
    Ok(v)
}

/// `zero`, `segment:α,β`, `exponential:A,L`, `triangle:xl,xp,xr,h` or a JSON object.
pub fn parse_profile(s: &str) -> Result<Profile, CliError> {
    if s.trim_start().starts_with('{') {
        return serde_json::from_str(s).map_err(|e| CliError::Config(format!("profile: {e}")));
    }
    let (name, rest) = split_spec(s);
    Ok(match name.as_str() {
        "zero" => Profile::zero(),
        "segment" => {
            let v = args(&rest, 2, "segment")?;
            Profile::segment(v[0], v[1])
        }
        "exponential" | "exp" => {
            let v = args(&rest, 2, "exponential")?;
            Profile::exponential(v[0], v[1])
        }
        "triangle" => {
            let v = args(&rest, 4, "triangle")?;
            Profile::triangle(v[0], v[1], v[2], v[3])
        }
        _ => return Err(CliError::Config(format!("unknown profile {s:?}"))),
    })
}

/// `none`, `constant:k`, `linear:k`, `polyx:c0,c1,…`, `timeonly:c0,c1,…` or a JSON object.
pub fn parse_pressure(s: &str) -> Result<PressureSpec, CliError> {
    if s.trim_start().starts_with('{') {
        return serde_json::from_str(s).map_err(|e| CliError::Config(format!("pressure: {e}")));
    }
    let (name, rest) = split_spec(s);
    let list = || match rest.first() {
        Some(r) => numbers(r),
        None => Ok(Vec::new()),
    };
    Ok(match name.as_str() {
        "none" => PressureSpec::none(),
        "constant" | "const" => PressureSpec::constant(args(&rest, 1, "constant")?[0]),
        "linear" | "linearinx" => PressureSpec::linear_in_x(args(&rest, 1, "linear")?[0]),
        "polyx" => PressureSpec::poly_x(list()?),
        "timeonly" => PressureSpec::time_only(list()?),
        _ => return Err(CliError::Config(format!("unknown pressure {s:?}"))),
    })
}

/// A comma list or `start:stop:step` (inclusive).
pub fn parse_times(s: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let v = numbers(&parts.join(","))?;
        let (a, b, h) = (v[0], v[1], v[2]);
        if !(h > 0.0) || b < a {
            return Err(CliError::Config(format!("bad time range {s:?}")));
        }
        let n = ((b - a) / h + 1e-9).floor() as usize;
        return Ok((0..=n).map(|i| a + h * i as f64).collect());
    }
    let v = numbers(s)?;
    if v.is_empty() {
        return Err(CliError::Config("no times given".into()));
    }
    Ok(v)
}
