//! Run configuration: strict JSON schema, defaults and validation.

use std::path::PathBuf;

use dlab_core::evolve::{IntegratorConfig, Scheme};
use dlab_core::model::{Params12, Params21, Rational};
use dlab_core::spectral::{make_grid, Grid};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::sync::Arc;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{0}")]
    Syntax(String),
    #[error("{0}")]
    Schema(String),
    #[error("{0}")]
    Admissibility(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum System {
    TwoPlusOne,
    OnePlusTwo,
}

/// Coefficients of the (2+1) system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params21Config {
    pub alpha: [f64; 2],
    pub gamma: [f64; 2],
    pub beta: f64,
    pub q: [f64; 2],
    pub p: Rational,
}

/// Coefficients of the (1+2) system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params12Config {
    pub gamma: f64,
    pub q: f64,
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
    pub p: [Rational; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    TwoPlusOne(Params21Config),
    OnePlusTwo(Params12Config),
}

impl Model {
    pub fn system(&self) -> System {
        match self {
            Model::TwoPlusOne(_) => System::TwoPlusOne,
            Model::OnePlusTwo(_) => System::OnePlusTwo,
        }
    }

    pub fn params21(&self) -> Option<Params21> {
        match self {
            Model::TwoPlusOne(c) => Params21::new(c.alpha, c.gamma, c.beta, c.q, c.p).ok(),
            Model::OnePlusTwo(_) => None,
        }
    }

    pub fn params12(&self) -> Option<Params12> {
        match self {
            Model::OnePlusTwo(c) => Params12::new(c.gamma, c.q, c.alpha, c.beta, c.p).ok(),
            Model::TwoPlusOne(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub length: f64,
    pub points: usize,
}

impl GridConfig {
    pub fn build(&self) -> Result<Arc<Grid>, ConfigError> {
        make_grid(self.length, self.points).map_err(|e| ConfigError::Admissibility(format!("grid: {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeName {
    Ifrk4,
    Strang,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorSection {
    pub dt: f64,
    pub scheme: SchemeName,
    pub dealias: bool,
    pub monitor_stride: usize,
    pub max_h1: Option<f64>,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        let d = IntegratorConfig::default();
        IntegratorSection {
            dt: d.dt,
            scheme: SchemeName::Ifrk4,
            dealias: d.dealias,
            monitor_stride: d.monitor_stride,
            max_h1: d.max_h1,
        }
    }
}

impl IntegratorSection {
    pub fn to_config(&self) -> IntegratorConfig {
        IntegratorConfig {
            dt: self.dt,
            scheme: match self.scheme {
                SchemeName::Ifrk4 => Scheme::Ifrk4,
                SchemeName::Strang => Scheme::Strang,
            },
            dealias: self.dealias,
            monitor_stride: self.monitor_stride,
            max_h1: self.max_h1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Sech,
    Sech2,
    Gauss,
}

/// `amplitude * shape((x - center) / width) * exp(i wavenumber x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bump {
    pub shape: Shape,
    pub amplitude: f64,
    #[serde(default = "one")]
    pub width: f64,
    #[serde(default)]
    pub center: f64,
    /// Ignored for real components.
    #[serde(default)]
    pub wavenumber: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateTask {
    pub t_final: f64,
    /// Sums of bumps for the three components, in system order.
    pub initial: [Vec<Bump>; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundstateTask {
    pub r: f64,
    pub l: f64,
    pub m: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default)]
    pub symmetrize_every: Option<usize>,
}

fn default_tol() -> f64 {
    1e-8
}

fn default_max_iters() -> usize {
    50_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaTask {
    pub r: f64,
    pub l: f64,
    pub m: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_width")]
    pub width: f64,
}

fn default_width() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityTask {
    pub r: f64,
    pub l: f64,
    pub m: f64,
    pub delta: f64,
    pub t_final: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_amplification")]
    pub amplification: f64,
}

fn default_amplification() -> f64 {
    10.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolitonTask {
    /// Speed `C` of the long-wave solitary wave.
    pub speed: f64,
    /// Long-wave component (1 or 2) whose coefficients are used in the
    /// (1+2) system.
    #[serde(default = "default_component")]
    pub component: usize,
}

fn default_component() -> usize {
    1
}

/// Ground states on the Cartesian product `r × l × m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepTask {
    pub r: Vec<f64>,
    pub l: Vec<f64>,
    pub m: Vec<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
}

impl SweepTask {
    pub fn points(&self) -> Vec<[f64; 3]> {
        let mut out = Vec::new();
        for &r in &self.r {
            for &l in &self.l {
                for &m in &self.m {
                    out.push([r, l, m]);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Simulate(SimulateTask),
    Groundstate(GroundstateTask),
    Lambda(LambdaTask),
    Stability(StabilityTask),
    Soliton(SolitonTask),
    Sweep(SweepTask),
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Simulate(_) => "simulate",
            Task::Groundstate(_) => "groundstate",
            Task::Lambda(_) => "lambda",
            Task::Stability(_) => "stability",
            Task::Soliton(_) => "soliton",
            Task::Sweep(_) => "sweep",
        }
    }
}

/// Document layout; `params` is decoded once `system` is known.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    system: System,
    params: Value,
    grid: GridConfig,
    #[serde(default)]
    integrator: IntegratorSection,
    task: Task,
    #[serde(default)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: Model,
    pub grid: GridConfig,
    pub integrator: IntegratorSection,
    pub task: Task,
    /// Output directory; the command line `--out` takes precedence.
    pub output: Option<PathBuf>,
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| match e.classify() {
        serde_json::error::Category::Syntax | serde_json::error::Category::Eof => {
            ConfigError::Syntax(format!("syntax error: {e}"))
        }
        _ => ConfigError::Schema(format!("schema violation: {e}")),
    })?;
    let schema = |what: &str, e: serde_json::Error| ConfigError::Schema(format!("schema violation in {what}: {e}"));
    let model = match raw.system {
        System::TwoPlusOne => Model::TwoPlusOne(serde_json::from_value(raw.params).map_err(|e| schema("params", e))?),
        System::OnePlusTwo => Model::OnePlusTwo(serde_json::from_value(raw.params).map_err(|e| schema("params", e))?),
    };
    let cfg = RunConfig {
        model,
        grid: raw.grid,
        integrator: raw.integrator,
        task: raw.task,
        output: raw.output,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn admissible(cond: bool, msg: impl FnOnce() -> String) -> Result<(), ConfigError> {
    if cond {
        Ok(())
    } else {
        Err(ConfigError::Admissibility(msg()))
    }
}

fn positive(name: &str, x: f64) -> Result<(), ConfigError> {
    admissible(x > 0.0 && x.is_finite(), || format!("{name} must be positive and finite, got {x}"))
}

fn nonnegative(name: &str, x: f64) -> Result<(), ConfigError> {
    admissible(x >= 0.0 && x.is_finite(), || format!("{name} must be nonnegative and finite, got {x}"))
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        match &self.model {
            Model::TwoPlusOne(c) => {
                Params21::new(c.alpha, c.gamma, c.beta, c.q, c.p)
                    .map_err(|e| ConfigError::Admissibility(format!("params: {e}")))?;
            }
            Model::OnePlusTwo(c) => {
                Params12::new(c.gamma, c.q, c.alpha, c.beta, c.p)
                    .map_err(|e| ConfigError::Admissibility(format!("params: {e}")))?;
            }
        }
        self.grid.build()?;
        positive("integrator.dt", self.integrator.dt)?;
        admissible(self.integrator.monitor_stride > 0, || "integrator.monitor_stride must be positive".into())?;
        if let Some(h) = self.integrator.max_h1 {
            positive("integrator.max_h1", h)?;
        }
        let two_plus_one = || {
            admissible(self.model.system() == System::TwoPlusOne, || {
                format!("task {} needs the two-plus-one system", self.task.name())
            })
        };
        match &self.task {
            Task::Simulate(t) => {
                nonnegative("task.simulate.t_final", t.t_final)?;
                for bump in t.initial.iter().flatten() {
                    positive("bump width", bump.width)?;
                    admissible(bump.amplitude.is_finite() && bump.center.is_finite() && bump.wavenumber.is_finite(), || {
                        "bump parameters must be finite".into()
                    })?;
                }
            }
            Task::Groundstate(t) => {
                two_plus_one()?;
                for (name, x) in [("r", t.r), ("l", t.l), ("m", t.m)] {
                    nonnegative(&format!("task.groundstate.{name}"), x)?;
                }
                positive("task.groundstate.tol", t.tol)?;
            }
            Task::Lambda(t) => {
                two_plus_one()?;
                positive("task.lambda.r", t.r)?;
                positive("task.lambda.l", t.l)?;
                admissible(t.m.is_finite(), || "task.lambda.m must be finite".into())?;
                positive("task.lambda.tol", t.tol)?;
                positive("task.lambda.width", t.width)?;
            }
            Task::Stability(t) => {
                two_plus_one()?;
                positive("task.stability.r", t.r)?;
                positive("task.stability.l", t.l)?;
                admissible(t.m.is_finite(), || "task.stability.m must be finite".into())?;
                nonnegative("task.stability.delta", t.delta)?;
                nonnegative("task.stability.t_final", t.t_final)?;
                positive("task.stability.amplification", t.amplification)?;
            }
            Task::Soliton(t) => {
                positive("task.soliton.speed", t.speed)?;
                admissible(t.component == 1 || t.component == 2, || {
                    format!("task.soliton.component must be 1 or 2, got {}", t.component)
                })?;
            }
            Task::Sweep(t) => {
                two_plus_one()?;
                admissible(!t.r.is_empty() && !t.l.is_empty() && !t.m.is_empty(), || {
                    "task.sweep needs at least one value of r, l and m".into()
                })?;
                for x in t.r.iter().chain(&t.l).chain(&t.m) {
                    nonnegative("task.sweep masses", *x)?;
                }
                positive("task.sweep.tol", t.tol)?;
            }
        }
        Ok(())
    }

    /// Canonical JSON form with every default spelled out.
    pub fn to_json(&self) -> String {
        let params = match &self.model {
            Model::TwoPlusOne(c) => serde_json::to_value(c),
            Model::OnePlusTwo(c) => serde_json::to_value(c),
        }
        .expect("parameters serialize");
        let raw = RawConfig {
            system: self.model.system(),
            params,
            grid: self.grid.clone(),
            integrator: self.integrator.clone(),
            task: self.task.clone(),
            output: self.output.clone(),
        };
        serde_json::to_string_pretty(&raw).expect("config serializes")
    }
}
