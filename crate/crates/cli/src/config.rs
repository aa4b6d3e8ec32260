//! Run configuration: a TOML file with a required `[potential]` table and
//! optional `[grid]`, `[knobs]`, `[tolerances]` and `[window]` tables.
//!
//! ```toml
//! seed = 7
//! alpha = "1e-4..1e-2 log 20"   # or a list: [1e-4, 1e-3]
//!
//! [potential]
//! family = "poly_well"
//! v0 = 1.0
//! sigma = 5.0
//! s = 4.0
//! ```

use std::path::{Path, PathBuf};

use qed_binding::certificate::Knobs;
use qed_binding::potential::{make_potential, Family, Potential, PotentialParams};
use qed_binding::schrodinger::RadialGrid;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_OUT: &str = "qed-binding-out";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub family: String,
    pub v0: f64,
    pub sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    /// `(r, V(r))` knots for the custom family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Defaults to where `|V|` has decayed by 10⁻¹⁰, at least 40σ.
    #[serde(default)]
    pub r_max: Option<f64>,
    #[serde(default = "default_n")]
    pub n: usize,
}

fn default_n() -> usize {
    4000
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { r_max: None, n: default_n() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnobSpec {
    #[serde(default = "one")]
    pub c_self: f64,
    #[serde(default = "one")]
    pub c7: f64,
    #[serde(default = "default_g_max")]
    pub support_g_max: f64,
}

fn one() -> f64 {
    1.0
}

fn default_g_max() -> f64 {
    0.1
}

impl Default for KnobSpec {
    fn default() -> Self {
        let k = Knobs::default();
        Self { c_self: k.c_self, c7: k.c7, support_g_max: k.support_g_max }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Samples per Monte-Carlo oracle in `verify`.
    #[serde(default = "default_samples")]
    pub mc_samples: u64,
    /// Allowed oracle deviation in standard errors.
    #[serde(default = "default_sigmas")]
    pub oracle_sigmas: f64,
    /// Relative tolerance of the scaling and closed-form checks.
    #[serde(default = "default_scaling")]
    pub scaling: f64,
}

fn default_samples() -> u64 {
    10_000_000
}

fn default_sigmas() -> f64 {
    3.0
}

fn default_scaling() -> f64 {
    1e-4
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { mc_samples: default_samples(), oracle_sigmas: default_sigmas(), scaling: default_scaling() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    /// Points of the margin(λ) curve per certified α.
    #[serde(default = "default_lambda_points")]
    pub lambda_points: usize,
    #[serde(default = "yes")]
    pub critical_alpha: bool,
}

fn default_lambda_points() -> usize {
    16
}

fn yes() -> bool {
    true
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self { lambda_points: default_lambda_points(), critical_alpha: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphaSpec {
    List(Vec<f64>),
    Sweep(String),
}

impl Default for AlphaSpec {
    fn default() -> Self {
        AlphaSpec::List(vec![1e-4])
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    potential: PotentialSpec,
    #[serde(default)]
    grid: GridSpec,
    #[serde(default)]
    alpha: AlphaSpec,
    #[serde(default)]
    knobs: KnobSpec,
    #[serde(default)]
    tolerances: Tolerances,
    #[serde(default)]
    window: WindowSpec,
    seed: Option<u64>,
    out: Option<PathBuf>,
}

/// Validated configuration with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub potential: PotentialSpec,
    pub grid: GridSpec,
    pub alpha: AlphaSpec,
    pub alphas: Vec<f64>,
    pub knobs: KnobSpec,
    pub tolerances: Tolerances,
    pub window: WindowSpec,
    pub seed: u64,
    #[serde(skip)]
    pub out: PathBuf,
}

impl RunConfig {
    pub fn family(&self) -> Result<Family> {
        self.potential.family.parse().map_err(CliError::from)
    }

    pub fn build_potential(&self) -> Result<Potential> {
        let spec = &self.potential;
        let params = PotentialParams {
            v0: spec.v0,
            sigma: spec.sigma,
            s: spec.s,
            table: spec.table.as_ref().map(|t| t.iter().map(|&[r, v]| (r, v)).collect()),
        };
        Ok(make_potential(self.family()?, &params)?)
    }

    pub fn build_grid(&self, p: &Potential) -> Result<RadialGrid> {
        Ok(match self.grid.r_max {
            Some(r_max) => RadialGrid::new(r_max, self.grid.n)?,
            None => RadialGrid::for_potential(p, self.grid.n)?,
        })
    }

    pub fn knobs(&self) -> Knobs {
        Knobs { c_self: self.knobs.c_self, c7: self.knobs.c7, support_g_max: self.knobs.support_g_max }
    }
}

/// Expand `"a..b log n"` or `"a..b lin n"` into `n` points including both ends.
pub fn parse_sweep(text: &str) -> std::result::Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split_whitespace().collect();
    let [range, mode, count] = parts[..] else {
        return Err(format!("sweep must read \"a..b log|lin n\" (got {text:?})"));
    };
    let (a, b) = range.split_once("..").ok_or_else(|| format!("sweep range {range:?} lacks \"..\""))?;
    let parse = |s: &str| s.parse::<f64>().map_err(|e| format!("bad sweep bound {s:?}: {e}"));
    let (a, b) = (parse(a)?, parse(b)?);
    let n: usize = count.parse().map_err(|e| format!("bad sweep count {count:?}: {e}"))?;
    if n == 0 {
        return Err("sweep count must be positive".into());
    }
    if !(a.is_finite() && b.is_finite() && a <= b) {
        return Err(format!("sweep bounds must satisfy a <= b (got {a}..{b})"));
    }
    let t = |i: usize| if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
    let mut out: Vec<f64> = match mode {
        "log" => {
            if a <= 0.0 {
                return Err("log sweep needs positive bounds".into());
            }
            (0..n).map(|i| (a.ln() + t(i) * (b.ln() - a.ln())).exp()).collect()
        }
        "lin" => (0..n).map(|i| a + t(i) * (b - a)).collect(),
        other => return Err(format!("sweep mode must be log or lin (got {other:?})")),
    };
    out[0] = a;
    if n > 1 {
        out[n - 1] = b;
    }
    Ok(out)
}

fn line_of_offset(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].matches('\n').count() + 1
}

/// First line assigning `key`, or 1.
fn line_of_key(src: &str, key: &str) -> usize {
    src.lines()
        .position(|l| {
            let t = l.trim_start();
            t.strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('='))
        })
        .map_or(1, |i| i + 1)
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let src = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config_str(&src, path)
}

pub fn parse_config_str(src: &str, path: &Path) -> Result<RunConfig> {
    let fail = |line: usize, message: String| CliError::Config { path: path.to_path_buf(), line, message };
    let raw: RawConfig = toml::from_str(src).map_err(|e| {
        let line = e.span().map_or(1, |s| line_of_offset(src, s.start));
        fail(line, e.message().to_string())
    })?;

    let alphas = match &raw.alpha {
        AlphaSpec::List(v) => v.clone(),
        AlphaSpec::Sweep(s) => parse_sweep(s).map_err(|m| fail(line_of_key(src, "alpha"), m))?,
    };
    if alphas.is_empty() {
        return Err(fail(line_of_key(src, "alpha"), "alpha list is empty".into()));
    }
    if let Some(bad) = alphas.iter().find(|a| !(**a > 0.0 && **a <= 1.0)) {
        return Err(fail(line_of_key(src, "alpha"), format!("alpha must lie in (0, 1] (got {bad})")));
    }

    let cfg = RunConfig {
        potential: raw.potential,
        grid: raw.grid,
        alpha: raw.alpha,
        alphas,
        knobs: raw.knobs,
        tolerances: raw.tolerances,
        window: raw.window,
        seed: raw.seed.unwrap_or(DEFAULT_SEED),
        out: raw.out.unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
    };

    let potential = cfg.build_potential().map_err(|e| {
        let key = if e.to_string().contains("depth") {
            "v0"
        } else if e.to_string().contains("sigma") {
            "sigma"
        } else {
            "family"
        };
        fail(line_of_key(src, key), e.to_string())
    })?;
    cfg.build_grid(&potential).map_err(|e| fail(line_of_key(src, "n"), e.to_string()))?;
    cfg.knobs().validate().map_err(|e| fail(line_of_key(src, "c_self"), e.to_string()))?;
    let t = &cfg.tolerances;
    if t.mc_samples < 10_000 {
        return Err(fail(line_of_key(src, "mc_samples"), "mc_samples must be at least 10000".into()));
    }
    if !(t.oracle_sigmas > 0.0 && t.scaling > 0.0) {
        return Err(fail(line_of_key(src, "oracle_sigmas"), "tolerances must be positive".into()));
    }
    if cfg.window.lambda_points < 2 {
        return Err(fail(line_of_key(src, "lambda_points"), "lambda_points must be at least 2".into()));
    }
    Ok(cfg)
}
