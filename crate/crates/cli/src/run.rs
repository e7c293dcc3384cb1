//! Task dispatch and artifact writing.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use dlab_core::conserved::ConservedReport;
use dlab_core::evolve::{integrate_observed, EvolveError, HasInvariants, IntegratorConfig, Status};
use dlab_core::format_float;
use dlab_core::model::{CoupledSystem, ModelError, Params21, State12, State21};
use dlab_core::spectral::{Field, FieldKind, Grid};
use dlab_core::stability::{stability_experiment, StabilityError, StabilityOptions, Verdict};
use dlab_core::varsolve::{lambda_minimize, theta_minimize, LambdaOptions, MinimizerResult, ThetaOptions, VarError};
use dlab_core::waves::{kdv_profile, profile_residual};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::config::{Bump, Model, RunConfig, Shape, SimulateTask, Task};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    NonConvergence(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical(_) => 3,
            RunError::NonConvergence(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Config(_) => "config",
            RunError::Numerical(_) => "numerical",
            RunError::NonConvergence(_) => "non_convergence",
        }
    }

    /// Machine-readable form written to stderr.
    pub fn to_json(&self) -> String {
        json!({"error": {"kind": self.kind(), "exit_code": self.exit_code(), "message": self.to_string()}}).to_string()
    }
}

impl From<VarError> for RunError {
    fn from(e: VarError) -> Self {
        match e {
            VarError::Hypothesis(_) | VarError::InvalidConstraint(_) | VarError::Model(_) | VarError::Grid(_) => {
                RunError::Config(e.to_string())
            }
            VarError::ZeroMass(_) | VarError::Wave(_) => RunError::Numerical(e.to_string()),
        }
    }
}

impl From<EvolveError> for RunError {
    fn from(e: EvolveError) -> Self {
        match e {
            EvolveError::NanDetected { .. } => RunError::Numerical(e.to_string()),
            _ => RunError::Config(e.to_string()),
        }
    }
}

impl From<StabilityError> for RunError {
    fn from(e: StabilityError) -> Self {
        match e {
            StabilityError::Evolve(e) => e.into(),
            other => RunError::Config(other.to_string()),
        }
    }
}

impl From<ModelError> for RunError {
    fn from(e: ModelError) -> Self {
        RunError::Config(e.to_string())
    }
}

/// Output directory; every file goes through a temporary file and a rename.
pub struct Artifacts {
    root: PathBuf,
    written: Vec<String>,
}

impl Artifacts {
    pub fn new(root: &Path) -> Result<Artifacts, RunError> {
        fs::create_dir_all(root)
            .map_err(|e| RunError::Config(format!("cannot create output directory {}: {e}", root.display())))?;
        Ok(Artifacts {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), RunError> {
        write_atomic(&self.root.join(name), contents)?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }
}

fn write_atomic(path: &Path, contents: &str) -> Result<(), RunError> {
    let io = |e: std::io::Error| RunError::Config(format!("cannot write {}: {e}", path.display()));
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn csv(header: &str, rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    csv_cells(header, rows.into_iter().map(|row| row.into_iter().map(format_float).collect()))
}

fn csv_cells(header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// What a task reports back for the manifest.
struct TaskOutcome {
    verdicts: Map<String, Value>,
    failure: Option<RunError>,
}

impl TaskOutcome {
    fn ok(verdicts: Map<String, Value>) -> TaskOutcome {
        TaskOutcome { verdicts, failure: None }
    }
}

pub struct RunSummary {
    pub manifest: Value,
    pub outputs: Vec<String>,
}

/// Runs the configured task into `out`. Artifacts written before a
/// non-convergence or numerical failure are kept and listed in the manifest.
pub fn run(cfg: &RunConfig, out: &Path, threads: Option<usize>) -> Result<RunSummary, RunError> {
    let start = Instant::now();
    let grid = cfg.grid.build().map_err(|e| RunError::Config(e.to_string()))?;
    let mut artifacts = Artifacts::new(out)?;
    let outcome = match &cfg.task {
        Task::Simulate(t) => match &cfg.model {
            Model::TwoPlusOne(_) => {
                let prm = cfg.model.params21().expect("validated");
                let s0 = build21(&grid, t)?;
                simulate(&prm, &s0, t, &cfg.integrator.to_config(), &mut artifacts)?
            }
            Model::OnePlusTwo(_) => {
                let prm = cfg.model.params12().expect("validated");
                let s0 = build12(&grid, t)?;
                simulate(&prm, &s0, t, &cfg.integrator.to_config(), &mut artifacts)?
            }
        },
        Task::Groundstate(t) => {
            let prm = cfg.model.params21().expect("validated");
            let opts = ThetaOptions {
                tol: t.tol,
                max_iters: t.max_iters,
                symmetrize_every: t.symmetrize_every,
                initial: None,
            };
            let res = theta_minimize(t.r, t.l, t.m, &prm, &grid, &opts)?;
            groundstate_outputs(&res, &prm, &mut artifacts)?
        }
        Task::Lambda(t) => {
            let prm = cfg.model.params21().expect("validated");
            let opts = LambdaOptions {
                theta: ThetaOptions {
                    tol: t.tol,
                    max_iters: t.max_iters,
                    ..ThetaOptions::default()
                },
                width: t.width,
            };
            lambda_task(t.r, t.l, t.m, &prm, &grid, &opts, &mut artifacts)?
        }
        Task::Stability(t) => {
            let prm = cfg.model.params21().expect("validated");
            let wave = lambda_minimize(t.r, t.l, t.m, &prm, &grid, &LambdaOptions::default())?;
            let opts = StabilityOptions {
                seed: t.seed,
                amplification: t.amplification,
                ..StabilityOptions::default()
            };
            let rec = stability_experiment(&wave.minimizer, t.delta, t.t_final, &prm, &cfg.integrator.to_config(), &opts)?;
            artifacts.write("stability.csv", &rec.csv())?;
            artifacts.write("stability.json", &to_json(&rec))?;
            artifacts.write("wave.csv", &profile_csv(&wave.minimizer.fields))?;
            let mut v = Map::new();
            v.insert("verdict".into(), serde_json::to_value(rec.verdict).expect("serializable"));
            v.insert("max_distance".into(), json!(rec.max_distance));
            v.insert("max_mass_deviation".into(), json!(rec.max_mass_deviation));
            v.insert("wave_converged".into(), json!(wave.minimizer.converged));
            let failure = if !wave.minimizer.converged {
                Some(RunError::NonConvergence("solitary wave did not converge".into()))
            } else {
                None
            };
            if let Verdict::Escaped { time } = rec.verdict {
                v.insert("escape_time".into(), json!(time));
            }
            TaskOutcome { verdicts: v, failure }
        }
        Task::Soliton(t) => {
            let (p, beta) = match &cfg.model {
                Model::TwoPlusOne(c) => (c.p, c.beta),
                Model::OnePlusTwo(c) => (c.p[t.component - 1], c.beta[t.component - 1]),
            };
            let phi = kdv_profile(p, beta, t.speed, &grid).map_err(|e| RunError::Config(e.to_string()))?;
            let rows = grid.nodes().into_iter().zip(phi.real_parts()).map(|(x, y)| vec![x, y]);
            artifacts.write("soliton.csv", &csv("x,value", rows))?;
            let mut v = Map::new();
            v.insert("peak".into(), json!(phi.max_abs()));
            v.insert("mass".into(), json!(phi.l2_norm2()));
            TaskOutcome::ok(v)
        }
        Task::Sweep(t) => {
            let prm = cfg.model.params21().expect("validated");
            let opts = ThetaOptions {
                tol: t.tol,
                max_iters: t.max_iters,
                ..ThetaOptions::default()
            };
            sweep(&t.points(), &prm, &grid, &opts, threads, &mut artifacts)?
        }
    };

    let mut manifest = Map::new();
    manifest.insert("config_hash".into(), json!(config_hash(cfg)));
    manifest.insert("versions".into(), json!({"dlab": env!("CARGO_PKG_VERSION")}));
    manifest.insert("task".into(), json!(cfg.task.name()));
    manifest.insert("wall_time_seconds".into(), json!(start.elapsed().as_secs_f64()));
    manifest.insert("verdicts".into(), Value::Object(outcome.verdicts));
    manifest.insert(
        "status".into(),
        json!(outcome.failure.as_ref().map(RunError::kind).unwrap_or("ok")),
    );
    manifest.insert("outputs".into(), json!(artifacts.written()));
    let manifest = Value::Object(manifest);
    write_atomic(&out.join("manifest.json"), &to_json(&manifest))?;
    if let Some(failure) = outcome.failure {
        return Err(failure);
    }
    Ok(RunSummary {
        manifest,
        outputs: artifacts.written().to_vec(),
    })
}

/// SHA-256 of the canonical configuration.
pub fn config_hash(cfg: &RunConfig) -> String {
    let digest = Sha256::digest(cfg.to_json().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn bump_value(b: &Bump, x: f64) -> f64 {
    let z = (x - b.center) / b.width;
    b.amplitude
        * match b.shape {
            Shape::Sech => 1.0 / z.cosh(),
            Shape::Sech2 => 1.0 / (z.cosh() * z.cosh()),
            Shape::Gauss => (-z * z).exp(),
        }
}

fn build_field(grid: &Arc<Grid>, bumps: &[Bump], kind: FieldKind) -> Field {
    match kind {
        FieldKind::Real => Field::from_real_fn(grid, |x| bumps.iter().map(|b| bump_value(b, x)).sum()),
        FieldKind::Complex => Field::from_complex_fn(grid, |x| {
            bumps
                .iter()
                .map(|b| Complex64::from_polar(bump_value(b, x), b.wavenumber * x))
                .sum()
        }),
    }
}

fn build21(grid: &Arc<Grid>, t: &SimulateTask) -> Result<State21, RunError> {
    Ok(State21::new(
        build_field(grid, &t.initial[0], FieldKind::Complex),
        build_field(grid, &t.initial[1], FieldKind::Complex),
        build_field(grid, &t.initial[2], FieldKind::Real),
        0.0,
    )?)
}

fn build12(grid: &Arc<Grid>, t: &SimulateTask) -> Result<State12, RunError> {
    Ok(State12::new(
        build_field(grid, &t.initial[0], FieldKind::Complex),
        build_field(grid, &t.initial[1], FieldKind::Real),
        build_field(grid, &t.initial[2], FieldKind::Real),
        0.0,
    )?)
}

fn state_csv(fields: &[Field; 3]) -> String {
    let mut header = vec!["x".to_string()];
    for (i, f) in fields.iter().enumerate() {
        match f.kind() {
            FieldKind::Complex => {
                header.push(format!("re{}", i + 1));
                header.push(format!("im{}", i + 1));
            }
            FieldKind::Real => header.push(format!("f{}", i + 1)),
        }
    }
    let grid = fields[0].grid();
    let rows = (0..grid.points()).map(|j| {
        let mut row = vec![grid.node(j)];
        for f in fields {
            let z = f.values()[j];
            row.push(z.re);
            if f.kind() == FieldKind::Complex {
                row.push(z.im);
            }
        }
        row
    });
    csv(&header.join(","), rows)
}

fn profile_csv(s: &State21) -> String {
    state_csv(s.fields())
}

fn simulate<M: CoupledSystem + HasInvariants>(
    model: &M,
    s0: &M::State,
    t: &SimulateTask,
    cfg: &IntegratorConfig,
    artifacts: &mut Artifacts,
) -> Result<TaskOutcome, RunError> {
    let out = integrate_observed(s0, model, cfg, t.t_final, |_, _| {})?;
    let n_masses = out.reports[0].values.masses.len();
    let mut text = ConservedReport::csv_header(n_masses);
    text.push('\n');
    for r in &out.reports {
        text.push_str(&r.csv_row());
        text.push('\n');
    }
    artifacts.write("conserved.csv", &text)?;
    artifacts.write("final_state.csv", &state_csv(M::raw(&out.last).fields()))?;
    let max_drift = out.reports.iter().map(ConservedReport::max_drift).fold(0.0, f64::max);
    let mut v = Map::new();
    v.insert("status".into(), serde_json::to_value(out.status).expect("serializable"));
    v.insert("final_time".into(), json!(M::raw(&out.last).time()));
    v.insert("max_relative_drift".into(), json!(max_drift));
    let failure = match out.status {
        Status::Completed => None,
        Status::BlowupGuard => Some(RunError::Numerical("blow-up guard stopped the run".into())),
        Status::NanDetected => Some(RunError::Numerical(format!(
            "non-finite values after t = {}",
            M::raw(&out.last).time()
        ))),
    };
    Ok(TaskOutcome { verdicts: v, failure })
}

fn minimizer_json(res: &MinimizerResult, prm: &Params21) -> Value {
    let residual = profile_residual([res.phi(0), res.phi(1)], res.w(), res.sigma, res.c, prm);
    let mut v = serde_json::to_value(res.summary()).expect("serializable");
    let obj = v.as_object_mut().expect("summary is an object");
    obj.insert("min_w".into(), json!(res.min_w()));
    obj.insert("gradient_norm".into(), json!(res.gradient_norm));
    obj.insert("profile_residual".into(), json!(residual));
    v
}

fn groundstate_outputs(
    res: &MinimizerResult,
    prm: &Params21,
    artifacts: &mut Artifacts,
) -> Result<TaskOutcome, RunError> {
    let summary = minimizer_json(res, prm);
    artifacts.write("groundstate.json", &to_json(&summary))?;
    artifacts.write("profile.csv", &profile_csv(&res.fields))?;
    let mut v = Map::new();
    for key in ["value", "sigma1", "sigma2", "c", "min_w", "converged"] {
        v.insert(key.into(), summary[key].clone());
    }
    let failure = (!res.converged).then(|| {
        RunError::NonConvergence(format!(
            "minimizer stopped after {} iterations with residual {:e}",
            res.iterations, res.gradient_norm
        ))
    });
    Ok(TaskOutcome { verdicts: v, failure })
}

fn lambda_task(
    r: f64,
    l: f64,
    m: f64,
    prm: &Params21,
    grid: &Arc<Grid>,
    opts: &LambdaOptions,
    artifacts: &mut Artifacts,
) -> Result<TaskOutcome, RunError> {
    let res = lambda_minimize(r, l, m, prm, grid, opts)?;
    let doc = json!({
        "lambda": res.minimizer.value,
        "a_star": res.a_star,
        "b_star": res.b_star,
        "boundary_hit": res.boundary_hit,
        "minimizer": minimizer_json(&res.minimizer, prm),
        "profile": minimizer_json(&res.profile, prm),
    });
    artifacts.write("lambda.json", &to_json(&doc))?;
    let rows = res
        .probes
        .iter()
        .map(|p| {
            let mut row: Vec<String> = [p.a, p.theta, p.objective].into_iter().map(format_float).collect();
            row.push(p.converged.to_string());
            row
        });
    artifacts.write("probes.csv", &csv_cells("a,theta,objective,converged", rows))?;
    artifacts.write("profile.csv", &profile_csv(&res.minimizer.fields))?;
    let mut v = Map::new();
    v.insert("lambda".into(), json!(res.minimizer.value));
    v.insert("a_star".into(), json!(res.a_star));
    v.insert("b_star".into(), json!(res.b_star));
    v.insert("boundary_hit".into(), json!(res.boundary_hit));
    v.insert("converged".into(), json!(res.minimizer.converged));
    let failure = (!res.minimizer.converged).then(|| RunError::NonConvergence("optimal profile did not converge".into()));
    Ok(TaskOutcome { verdicts: v, failure })
}

fn sweep(
    points: &[[f64; 3]],
    prm: &Params21,
    grid: &Arc<Grid>,
    opts: &ThetaOptions,
    threads: Option<usize>,
    artifacts: &mut Artifacts,
) -> Result<TaskOutcome, RunError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = threads {
        builder = builder.num_threads(k);
    }
    let pool = builder
        .build()
        .map_err(|e| RunError::Config(format!("cannot start worker threads: {e}")))?;
    let root = artifacts.root.clone();
    let results: Vec<Result<(MinimizerResult, Vec<String>), RunError>> = pool.install(|| {
        points
            .par_iter()
            .enumerate()
            .map(|(i, &[r, l, m])| {
                let res = theta_minimize(r, l, m, prm, grid, opts)?;
                let dir = format!("point_{i:04}");
                let mut own = Artifacts::new(&root.join(&dir))?;
                groundstate_outputs(&res, prm, &mut own)?;
                let names = own.written().iter().map(|n| format!("{dir}/{n}")).collect();
                Ok((res, names))
            })
            .collect()
    });
    let mut rows = Vec::new();
    let mut unconverged = 0;
    for (point, result) in points.iter().zip(results) {
        let (res, names) = result?;
        artifacts.written.extend(names);
        if !res.converged {
            unconverged += 1;
        }
        let s = res.summary();
        let mut row: Vec<String> = [point[0], point[1], point[2], s.value, s.sigma1, s.sigma2, s.c, res.min_w()]
            .into_iter()
            .map(format_float)
            .collect();
        row.push(s.converged.to_string());
        row.push(s.iterations.to_string());
        rows.push(row);
    }
    artifacts.write("sweep.csv", &csv_cells("r,l,m,value,sigma1,sigma2,c,min_w,converged,iterations", rows))?;
    let mut v = Map::new();
    v.insert("points".into(), json!(points.len()));
    v.insert("unconverged".into(), json!(unconverged));
    let failure = (unconverged > 0).then(|| RunError::NonConvergence(format!("{unconverged} sweep points did not converge")));
    Ok(TaskOutcome { verdicts: v, failure })
}
