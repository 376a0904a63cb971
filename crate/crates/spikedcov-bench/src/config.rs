//! Experiment configuration: types, defaults, and the INI-dialect parser.
//!
//! The config format is deliberately small. Lines are `key = value`, grouped
//! under `[section]` headers; `#` and `;` start comments. Recognized
//! sections are `[problem]`, `[solver.rgd]`, `[solver.rtr]` and `[output]`.
//! Unknown sections or keys are rejected so typos cannot silently fall back
//! to defaults.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use spikedcov::manifold::MetricParams;
use spikedcov::optim::SolverConfig;

use crate::{BenchError, BenchResult};

/// Default sample-size grid used by the benchmark figures.
pub const DEFAULT_N_GRID: &[usize] = &[12, 14, 15, 17, 20, 40, 70, 100, 200, 300];

/// Rule mapping a trial's tail index `d` to the metric weights `(α, β)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MetricRule {
    /// `α = 1, β = 0` regardless of the sampling distribution.
    Gaussian,
    /// `α = (p+d)/(p+d+1)`, `β = α − 1`, matched to the Student-t tail
    /// index `d` of the sampler.
    StudentMatched,
    /// Fixed user-chosen weights.
    Explicit { alpha: f64, beta: f64 },
}

impl MetricRule {
    /// Resolves the rule to concrete weights for dimension `p` and tail
    /// index `dof`.
    pub fn resolve(&self, p: usize, dof: f64) -> (f64, f64) {
        match *self {
            MetricRule::Gaussian => (1.0, 0.0),
            MetricRule::StudentMatched => {
                let a = (p as f64 + dof) / (p as f64 + dof + 1.0);
                (a, a - 1.0)
            }
            MetricRule::Explicit { alpha, beta } => (alpha, beta),
        }
    }

    fn parse(text: &str) -> BenchResult<Self> {
        let t = text.trim();
        if t.eq_ignore_ascii_case("gaussian") {
            return Ok(MetricRule::Gaussian);
        }
        if t.eq_ignore_ascii_case("student-matched") {
            return Ok(MetricRule::StudentMatched);
        }
        if let Some(rest) = t.strip_prefix("explicit") {
            let parts: Vec<&str> = rest
                .split([' ', ',', '\t'])
                .filter(|s| !s.is_empty())
                .collect();
            if parts.len() == 2 {
                let alpha = parse_f64("metric alpha", parts[0])?;
                let beta = parse_f64("metric beta", parts[1])?;
                return Ok(MetricRule::Explicit { alpha, beta });
            }
            return Err(BenchError::Config(
                "metric rule 'explicit' needs exactly two numbers, \
                 e.g. `metric = explicit 0.95 -0.05`"
                    .into(),
            ));
        }
        Err(BenchError::Config(format!(
            "unknown metric rule '{t}' (expected gaussian, student-matched \
             or explicit <alpha> <beta>)"
        )))
    }

    fn describe(&self) -> String {
        match *self {
            MetricRule::Gaussian => "gaussian".into(),
            MetricRule::StudentMatched => "student-matched".into(),
            MetricRule::Explicit { alpha, beta } => format!("explicit {alpha} {beta}"),
        }
    }
}

/// Estimation method run inside a trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    /// Projected sample covariance (direct, no iterations).
    Pscm,
    /// Tyler cost minimized by Riemannian gradient descent.
    TRgd,
    /// Tyler cost minimized by a Riemannian trust-region method.
    TRtr,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Pscm, Method::TRgd, Method::TRtr];

    /// Canonical name used in CSV columns.
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Pscm => "pscm",
            Method::TRgd => "t-rgd",
            Method::TRtr => "t-rtr",
        }
    }

    pub fn parse(text: &str) -> BenchResult<Self> {
        match text.trim().to_ascii_lowercase().as_str() {
            "pscm" => Ok(Method::Pscm),
            "t-rgd" | "rgd" => Ok(Method::TRgd),
            "t-rtr" | "rtr" => Ok(Method::TRtr),
            other => Err(BenchError::Config(format!(
                "unknown method '{other}' (expected pscm, t-rgd or t-rtr)"
            ))),
        }
    }
}

/// Per-solver iteration budget and stopping tolerance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverSettings {
    pub max_iters: usize,
    pub grad_tol: f64,
    /// Allow a finite-difference Hessian when the objective lacks an
    /// analytic one (trust region only).
    pub fd_hessian: bool,
}

impl SolverSettings {
    /// Gradient-descent defaults. The looser tolerance reflects that a
    /// backtracking line search on an unnormalized log-likelihood cannot
    /// certify decrease much below `√ε · |cost|` in double precision.
    pub fn rgd_default() -> Self {
        Self {
            max_iters: 500,
            grad_tol: 1e-5,
            fd_hessian: false,
        }
    }

    /// Trust-region defaults; Newton-type steps support a tight tolerance.
    pub fn rtr_default() -> Self {
        Self {
            max_iters: 100,
            grad_tol: 1e-6,
            fd_hessian: false,
        }
    }

    pub fn to_solver_config(self) -> SolverConfig {
        SolverConfig::default()
            .with_max_iters(self.max_iters)
            .with_grad_tol(self.grad_tol)
            .with_fd_hessian(self.fd_hessian)
    }
}

/// Full description of one Monte Carlo experiment.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    /// Ambient dimension.
    pub p: usize,
    /// Spike rank.
    pub k: usize,
    /// Student-t tail indices to sweep (values at or above the library's
    /// Gaussian threshold sample exactly Gaussian data).
    pub dofs: Vec<f64>,
    /// Spike-to-noise ratio of the truth.
    pub sigma: f64,
    /// Condition number of the truth's spike spectrum.
    pub cond: f64,
    /// Ascending sample sizes.
    pub n_grid: Vec<usize>,
    /// Monte Carlo repetitions per (dof, n) cell.
    pub trials: usize,
    /// Base seed; per-trial seeds are derived from it.
    pub seed: u64,
    /// Metric-weight rule for the solvers, error divergence and bounds.
    pub metric: MetricRule,
    /// Estimators to run; order is preserved in the outputs.
    pub methods: Vec<Method>,
    /// Overrides the density-generator constant used in the bounds. By
    /// default it is derived from each trial's tail index.
    pub alpha_pp_override: Option<f64>,
    pub rgd: SolverSettings,
    pub rtr: SolverSettings,
    /// Output directory; the CLI `--out` flag takes precedence.
    pub output_dir: Option<PathBuf>,
    /// Draw one truth per tail index instead of a fresh truth per trial.
    pub fixed_truth: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            p: 16,
            k: 4,
            dofs: vec![3.0, 100.0],
            sigma: 50.0,
            cond: 20.0,
            n_grid: DEFAULT_N_GRID.to_vec(),
            trials: 500,
            seed: 42,
            metric: MetricRule::StudentMatched,
            methods: vec![Method::Pscm, Method::TRgd, Method::TRtr],
            alpha_pp_override: None,
            rgd: SolverSettings::rgd_default(),
            rtr: SolverSettings::rtr_default(),
            output_dir: None,
            fixed_truth: false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_path<P: AsRef<Path>>(path: P) -> BenchResult<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_ini_str(&text)
    }

    /// Parses and validates a config in the INI dialect described in the
    /// module docs. Missing keys keep their defaults.
    pub fn from_ini_str(text: &str) -> BenchResult<Self> {
        let sections = parse_ini(text)?;
        let mut config = ExperimentConfig::default();
        for (section, entries) in &sections {
            match section.as_str() {
                "problem" => {
                    for (key, value) in entries {
                        match key.as_str() {
                            "p" => config.p = parse_usize(key, value)?,
                            "k" => config.k = parse_usize(key, value)?,
                            "dof" => config.dofs = parse_f64_list(key, value)?,
                            "sigma" => config.sigma = parse_f64(key, value)?,
                            "cond" => config.cond = parse_f64(key, value)?,
                            "n_grid" => config.n_grid = parse_usize_list(key, value)?,
                            "trials" => config.trials = parse_usize(key, value)?,
                            "seed" => config.seed = parse_u64(key, value)?,
                            "metric" => config.metric = MetricRule::parse(value)?,
                            "methods" => {
                                config.methods = value
                                    .split(',')
                                    .map(Method::parse)
                                    .collect::<BenchResult<Vec<_>>>()?;
                            }
                            "alpha_pp" => {
                                config.alpha_pp_override = Some(parse_f64(key, value)?)
                            }
                            "fixed_truth" => config.fixed_truth = parse_bool(key, value)?,
                            other => {
                                return Err(BenchError::Config(format!(
                                    "unknown key '{other}' in section [problem]"
                                )))
                            }
                        }
                    }
                }
                "solver.rgd" => apply_solver_keys(&mut config.rgd, "solver.rgd", entries)?,
                "solver.rtr" => apply_solver_keys(&mut config.rtr, "solver.rtr", entries)?,
                "output" => {
                    for (key, value) in entries {
                        match key.as_str() {
                            "dir" => config.output_dir = Some(PathBuf::from(value)),
                            other => {
                                return Err(BenchError::Config(format!(
                                    "unknown key '{other}' in section [output]"
                                )))
                            }
                        }
                    }
                }
                other => {
                    return Err(BenchError::Config(format!(
                        "unknown section [{other}] (expected [problem], \
                         [solver.rgd], [solver.rtr] or [output])"
                    )))
                }
            }
        }
        config.validate()?;
        Ok(config)
    }

    /// Checks every field; returns the first violation as a config error.
    pub fn validate(&self) -> BenchResult<()> {
        if self.p < 2 {
            return Err(BenchError::Config(format!(
                "p must be at least 2, got {}",
                self.p
            )));
        }
        if self.k < 1 || self.k >= self.p {
            return Err(BenchError::Config(format!(
                "k must satisfy 1 <= k < p, got k={}, p={}",
                self.k, self.p
            )));
        }
        if self.dofs.is_empty() {
            return Err(BenchError::Config("dof list must be nonempty".into()));
        }
        for &d in &self.dofs {
            if !(d > 0.0) || !d.is_finite() {
                return Err(BenchError::Config(format!(
                    "dof values must be positive and finite, got {d}"
                )));
            }
        }
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(BenchError::Config(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        if !(self.cond >= 1.0) || !self.cond.is_finite() {
            return Err(BenchError::Config(format!(
                "cond must be at least 1, got {}",
                self.cond
            )));
        }
        if self.n_grid.is_empty() {
            return Err(BenchError::Config("n_grid must be nonempty".into()));
        }
        for &n in &self.n_grid {
            if n < 2 {
                return Err(BenchError::Config(format!(
                    "n_grid entries must be at least 2, got {n}"
                )));
            }
        }
        if !self.n_grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(BenchError::Config(
                "n_grid must be strictly ascending".into(),
            ));
        }
        if self.trials < 1 {
            return Err(BenchError::Config("trials must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(BenchError::Config(
                "methods must list at least one of pscm, t-rgd, t-rtr".into(),
            ));
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                return Err(BenchError::Config(format!(
                    "method '{}' listed more than once",
                    m.as_str()
                )));
            }
        }
        if let Some(app) = self.alpha_pp_override {
            if !(app > 0.0) || !app.is_finite() {
                return Err(BenchError::Config(format!(
                    "alpha_pp must be positive, got {app}"
                )));
            }
        }
        for (name, s) in [("solver.rgd", &self.rgd), ("solver.rtr", &self.rtr)] {
            if s.max_iters < 1 {
                return Err(BenchError::Config(format!(
                    "{name}: max_iters must be at least 1"
                )));
            }
            if !(s.grad_tol > 0.0) || !s.grad_tol.is_finite() {
                return Err(BenchError::Config(format!(
                    "{name}: grad_tol must be positive, got {}",
                    s.grad_tol
                )));
            }
        }
        // The metric weights must define a valid metric for every tail
        // index in the sweep.
        for &d in &self.dofs {
            let (alpha, beta) = self.metric.resolve(self.p, d);
            MetricParams::new(self.p, self.k, alpha, beta).map_err(|e| {
                BenchError::Config(format!(
                    "metric rule '{}' yields invalid weights at dof {d}: {e}",
                    self.metric.describe()
                ))
            })?;
        }
        Ok(())
    }
}

fn apply_solver_keys(
    settings: &mut SolverSettings,
    section: &str,
    entries: &BTreeMap<String, String>,
) -> BenchResult<()> {
    for (key, value) in entries {
        match key.as_str() {
            "max_iters" => settings.max_iters = parse_usize(key, value)?,
            "grad_tol" => settings.grad_tol = parse_f64(key, value)?,
            "fd_hessian" => settings.fd_hessian = parse_bool(key, value)?,
            other => {
                return Err(BenchError::Config(format!(
                    "unknown key '{other}' in section [{section}]"
                )))
            }
        }
    }
    Ok(())
}

/// Parses the INI dialect into `section -> key -> value` maps. Duplicate
/// keys within a section are rejected.
pub fn parse_ini(text: &str) -> BenchResult<BTreeMap<String, BTreeMap<String, String>>> {
    let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(inner) = line.strip_prefix('[') {
            let name = inner
                .strip_suffix(']')
                .ok_or_else(|| {
                    BenchError::Config(format!(
                        "line {line_no}: unterminated section header '{line}'"
                    ))
                })?
                .trim()
                .to_string();
            if name.is_empty() {
                return Err(BenchError::Config(format!(
                    "line {line_no}: empty section name"
                )));
            }
            sections.entry(name.clone()).or_default();
            current = Some(name);
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(BenchError::Config(format!(
                "line {line_no}: expected `key = value`, got '{line}'"
            )));
        };
        let Some(section) = current.clone() else {
            return Err(BenchError::Config(format!(
                "line {line_no}: key '{}' appears before any [section] header",
                key.trim()
            )));
        };
        let key = key.trim().to_string();
        if key.is_empty() {
            return Err(BenchError::Config(format!("line {line_no}: empty key")));
        }
        let value = value.trim().to_string();
        let entry = sections.get_mut(&section).expect("section inserted above");
        if entry.insert(key.clone(), value).is_some() {
            return Err(BenchError::Config(format!(
                "line {line_no}: duplicate key '{key}' in section [{section}]"
            )));
        }
    }
    Ok(sections)
}

fn parse_usize(key: &str, value: &str) -> BenchResult<usize> {
    value.trim().parse::<usize>().map_err(|e| {
        BenchError::Config(format!("{key}: expected a nonnegative integer, got '{value}' ({e})"))
    })
}

fn parse_u64(key: &str, value: &str) -> BenchResult<u64> {
    value.trim().parse::<u64>().map_err(|e| {
        BenchError::Config(format!("{key}: expected a nonnegative integer, got '{value}' ({e})"))
    })
}

fn parse_f64(key: &str, value: &str) -> BenchResult<f64> {
    value.trim().parse::<f64>().map_err(|e| {
        BenchError::Config(format!("{key}: expected a number, got '{value}' ({e})"))
    })
}

fn parse_bool(key: &str, value: &str) -> BenchResult<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        other => Err(BenchError::Config(format!(
            "{key}: expected a boolean, got '{other}'"
        ))),
    }
}

fn parse_f64_list(key: &str, value: &str) -> BenchResult<Vec<f64>> {
    value
        .split(',')
        .map(|s| parse_f64(key, s))
        .collect::<BenchResult<Vec<_>>>()
        .and_then(|v| {
            if v.is_empty() {
                Err(BenchError::Config(format!("{key}: empty list")))
            } else {
                Ok(v)
            }
        })
}

fn parse_usize_list(key: &str, value: &str) -> BenchResult<Vec<usize>> {
    value
        .split(',')
        .map(|s| parse_usize(key, s))
        .collect::<BenchResult<Vec<_>>>()
        .and_then(|v| {
            if v.is_empty() {
                Err(BenchError::Config(format!("{key}: empty list")))
            } else {
                Ok(v)
            }
        })
}
