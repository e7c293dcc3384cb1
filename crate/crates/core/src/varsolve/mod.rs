//! Constrained energy minimization for the (2+1) system.
//!
//! `Θ(r, l, m)` is the infimum of the energy over triples with
//! `||φ1||^2 = r`, `||φ2||^2 = l`, `||w||^2 = m`. `Λ(r, l, m)` replaces the
//! constraint on `w` by the momentum constraint `H = m` and is reduced to a
//! one-dimensional search over `Θ` by boosting (see [`lambda_minimize`]).

mod direct;
mod engine;
mod lambda;
mod rearrange;
mod subadditivity;

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::conserved::{energy21_fields, EnergyParts};
use crate::model::{modulus_power, signed_pow, ModelError, Params21, State21};
use crate::spectral::{make_grid, Field, FieldKind, Grid, GridError};
use crate::waves::{kdv_profile, nls_profile, WaveError};

pub use direct::{direct_lambda_minimize, DirectOptions};
pub use lambda::{boost_parameter, lambda_minimize, LambdaOptions, LambdaResult, Probe};
pub use rearrange::{rearrange, symmetrize};
pub use subadditivity::{subadditivity_check, PartOutcome, SubadditivityReport};

use engine::{Problem, Settings, Triple};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VarError {
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("component {0} has zero mass")]
    ZeroMass(usize),
    #[error("invalid constraint: {0}")]
    InvalidConstraint(String),
    #[error(transparent)]
    Wave(#[from] WaveError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Outcome of a constrained minimization.
#[derive(Debug, Clone)]
pub struct MinimizerResult {
    /// `(φ1, φ2, w)` packed as a state at `t = 0`.
    pub fields: State21,
    /// Attained value of `Θ` or `Λ`.
    pub value: f64,
    pub sigma: [f64; 2],
    pub c: f64,
    /// `(r, l, m)` for `Θ`; `(r, l, H)` for `Λ`.
    pub masses: [f64; 3],
    pub iterations: usize,
    /// `||g1 + σ1 φ1|| + ||g2 + σ2 φ2|| + ||g_w + 2 c w||` at the returned point.
    pub gradient_norm: f64,
    pub converged: bool,
}

/// Scalar summary of a [`MinimizerResult`], as written to JSON artifacts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimizerSummary {
    pub value: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub c: f64,
    pub r: f64,
    pub l: f64,
    pub m_or_a: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl MinimizerResult {
    pub fn summary(&self) -> MinimizerSummary {
        MinimizerSummary {
            value: self.value,
            sigma1: self.sigma[0],
            sigma2: self.sigma[1],
            c: self.c,
            r: self.masses[0],
            l: self.masses[1],
            m_or_a: self.masses[2],
            converged: self.converged,
            iterations: self.iterations,
        }
    }

    pub fn phi(&self, j: usize) -> &Field {
        self.fields.u(j)
    }

    pub fn w(&self) -> &Field {
        self.fields.v()
    }

    /// Smallest sample of `w`.
    pub fn min_w(&self) -> f64 {
        self.w().real_parts().into_iter().fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone)]
pub struct ThetaOptions {
    /// Stop once the stationarity residual is below `tol` times its natural scale.
    pub tol: f64,
    pub max_iters: usize,
    /// Try a symmetric decreasing rearrangement every this many iterations.
    pub symmetrize_every: Option<usize>,
    /// Starting point; rescaled onto the constraint spheres.
    pub initial: Option<State21>,
}

impl Default for ThetaOptions {
    fn default() -> Self {
        ThetaOptions {
            tol: 1e-8,
            max_iters: 50_000,
            symmetrize_every: None,
            initial: None,
        }
    }
}

/// Gradient of the (2+1) energy:
/// `g_j = -φ_j'' - γ_j |φ_j|^q_j φ_j - α_j φ_j w` (variation in `conj φ_j`) and
/// `g_w = -2 w'' - 2β/(p+1) w^{p+1} - Σ α_j |φ_j|^2`, so that
/// `dE = 2 Re <g_j, h_j> + <g_w, h_w>`.
pub fn energy_gradient(s: &State21, prm: &Params21) -> (Field, Field, Field) {
    let [a, b, c] = gradient_fields([s.u1(), s.u2(), s.v()], prm);
    (a, b, c)
}

fn gradient_fields(f: [&Field; 3], prm: &Params21) -> [Field; 3] {
    let (alpha, gamma, q) = (prm.alpha(), prm.gamma(), prm.q());
    let p1 = prm.p().plus(1);
    let flux = 2.0 * prm.beta() / p1.value();
    let w = f[2].values();
    let envelope = |j: usize| {
        let d2 = f[j].derivative(2);
        let values = f[j]
            .values()
            .iter()
            .zip(d2.values())
            .zip(w)
            .map(|((z, z2), w)| -z2 - z * (gamma[j] * modulus_power(*z, q[j])) - z * (alpha[j] * w.re))
            .collect();
        Field::from_values(f[j].grid(), values, FieldKind::Complex).expect("common grid")
    };
    let d2 = f[2].derivative(2);
    let long = w
        .iter()
        .zip(d2.values())
        .zip(f[0].values().iter().zip(f[1].values()))
        .map(|((w, w2), (a, b))| {
            let g = -2.0 * w2.re
                - flux * signed_pow(w.re, p1)
                - (alpha[0] * a.norm_sqr() + alpha[1] * b.norm_sqr());
            Complex64::new(g, 0.0)
        })
        .collect();
    [
        envelope(0),
        envelope(1),
        Field::from_values(f[2].grid(), long, FieldKind::Real).expect("common grid"),
    ]
}

/// Lagrange multipliers `σ_j = -<g_j, φ_j> / ||φ_j||^2`, `c = -<g_w, w> / (2 ||w||^2)`.
pub fn extract_multipliers(s: &State21, prm: &Params21) -> Result<(f64, f64, f64), VarError> {
    for (i, f) in s.fields().iter().enumerate() {
        if f.l2_norm2() == 0.0 {
            return Err(VarError::ZeroMass(i));
        }
    }
    let (g1, g2, gw) = energy_gradient(s, prm);
    let sigma = |g: &Field, f: &Field| -g.inner(f).re / f.l2_norm2();
    Ok((
        sigma(&g1, s.u1()),
        sigma(&g2, s.u2()),
        -gw.inner(s.v()).re / (2.0 * s.v().l2_norm2()),
    ))
}

/// Multiplies both envelopes by `exp(i b x)`; `w` is unchanged.
pub fn boost(s: &State21, b: f64) -> State21 {
    if b == 0.0 {
        return s.clone();
    }
    let phase = |f: &Field| f.map_with_x(FieldKind::Complex, |x, z| z * Complex64::from_polar(1.0, b * x));
    State21::new(phase(s.u1()), phase(s.u2()), s.v().clone(), s.time()).expect("same grid")
}

/// Checks the hypotheses under which minimizers exist: `γ_j > 0`, `β > 0`,
/// `α_j >= 0`, `0 < q_j < 4`, `0 < p < 4`.
pub fn check_hypotheses(prm: &Params21) -> Result<(), VarError> {
    let fail = |msg: String| Err(VarError::Hypothesis(msg));
    for j in 0..2 {
        if !(prm.gamma()[j] > 0.0) {
            return fail(format!("gamma{} must be positive", j + 1));
        }
        if !(prm.alpha()[j] >= 0.0) {
            return fail(format!("alpha{} must be nonnegative", j + 1));
        }
        if !(prm.q()[j] > 0.0 && prm.q()[j] < 4.0) {
            return fail(format!("q{} must lie in (0, 4)", j + 1));
        }
    }
    if !(prm.beta() > 0.0) {
        return fail("beta must be positive".to_string());
    }
    if !(prm.p().value() < 4.0) {
        return fail("p must lie in (0, 4)".to_string());
    }
    Ok(())
}

fn check_masses(masses: [f64; 3]) -> Result<(), VarError> {
    if masses.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
        return Err(VarError::InvalidConstraint(format!(
            "masses must be nonnegative and finite, got {masses:?}"
        )));
    }
    if masses.iter().all(|&m| m == 0.0) {
        return Err(VarError::InvalidConstraint("all masses are zero".to_string()));
    }
    Ok(())
}

/// Decoupled profiles at unit frequency, used as the default starting point.
fn default_start(grid: &Arc<Grid>, prm: &Params21) -> Result<Triple, VarError> {
    Ok([
        nls_profile(prm.q()[0], prm.gamma()[0], 1.0, grid)?,
        nls_profile(prm.q()[1], prm.gamma()[1], 1.0, grid)?,
        kdv_profile(prm.p(), prm.beta(), 1.0, grid)?,
    ])
}

fn start_from(initial: Option<&State21>, grid: &Arc<Grid>, prm: &Params21) -> Result<Triple, VarError> {
    let fallback = default_start(grid, prm)?;
    let Some(init) = initial else {
        return Ok(fallback);
    };
    if !init.u1().same_grid(&fallback[0]) {
        return Err(VarError::Grid(GridError::GridMismatch));
    }
    let pick = |f: &Field, d: &Field| if f.l2_norm2() > 0.0 { f.clone() } else { d.clone() };
    Ok([
        pick(init.u1(), &fallback[0]),
        pick(init.u2(), &fallback[1]),
        pick(init.v(), &fallback[2]),
    ])
}

fn theta_half_gradient(x: &Triple, prm: &Params21) -> Triple {
    let [g1, g2, gw] = gradient_fields([&x[0], &x[1], &x[2]], prm);
    [g1, g2, gw.scale(0.5)]
}

/// Minimizes the energy on `||φ1||^2 = r`, `||φ2||^2 = l`, `||w||^2 = m`.
///
/// Zero masses are allowed for individual components (the component is then
/// identically zero); at least one must be positive. The minimizer is
/// returned phase-aligned (envelopes real-positive at their peaks) and
/// recentered so that the peak of `w` (or of the first nonzero component)
/// sits at `x = 0`. Non-convergence is reported through `converged = false`
/// with the best iterate.
pub fn theta_minimize(
    r: f64,
    l: f64,
    m: f64,
    prm: &Params21,
    grid: &Arc<Grid>,
    opts: &ThetaOptions,
) -> Result<MinimizerResult, VarError> {
    check_hypotheses(prm)?;
    let masses = [r, l, m];
    check_masses(masses)?;
    let start = start_from(opts.initial.as_ref(), grid, prm)?;
    let objective = |x: &Triple| -> EnergyParts { energy21_fields([&x[0], &x[1], &x[2]], prm) };
    let gradient = |x: &Triple| theta_half_gradient(x, prm);
    let sym = |x: &Triple| symmetrize(x);
    let problem = Problem {
        targets: [Some(r), Some(l), Some(m)],
        objective: &objective,
        gradient: &gradient,
        symmetrize: opts.symmetrize_every.map(|k| (k, &sym as &dyn Fn(&Triple) -> Triple)),
    };
    let out = engine::minimize(
        &problem,
        start,
        Settings {
            tol: opts.tol,
            max_iters: opts.max_iters,
        },
    );
    let mut fields = recenter(&out.fields);
    let mut value = out.parts.total();
    // Round-off can leave the far tail of `w` slightly negative when the
    // domain is sized for a slower component. `|w|` has the same mass and
    // gradient norm and never more energy for nonnegative couplings.
    let folded = fields[2].map(FieldKind::Real, |z| Complex64::new(z.re.abs(), 0.0));
    let trial = [fields[0].clone(), fields[1].clone(), folded];
    let folded_value = objective(&trial).total();
    if folded_value <= value + 1e-13 * out.parts.scale() {
        fields = trial;
        value = folded_value;
    }
    let state = State21::new(fields[0].clone(), fields[1].clone(), fields[2].clone(), 0.0)?;
    Ok(MinimizerResult {
        fields: state,
        value,
        sigma: [out.sigma[0], out.sigma[1]],
        c: out.sigma[2],
        masses,
        iterations: out.iterations,
        gradient_norm: out.residual,
        converged: out.converged,
    })
}

/// Two-pass [`theta_minimize`]: a first solve on a moderate domain measures
/// the decay rates `sqrt(sigma_1)`, `sqrt(sigma_2)`, `sqrt(c)`, then the
/// problem is solved again on [`grid_for_decay`] with the slowest rate, so
/// the tails reach `tail` before the boundary instead of the round-off floor.
pub fn theta_minimize_resolved(
    r: f64,
    l: f64,
    m: f64,
    prm: &Params21,
    dx: f64,
    tail: f64,
    opts: &ThetaOptions,
) -> Result<MinimizerResult, VarError> {
    let probe_grid = grid_for_decay(0.5, tail, dx)?;
    let first = theta_minimize(r, l, m, prm, &probe_grid, &ThetaOptions { initial: None, ..opts.clone() })?;
    let rates = [(r, first.sigma[0]), (l, first.sigma[1]), (m, first.c)];
    let decay = rates
        .iter()
        .filter(|(mass, _)| *mass > 0.0)
        .map(|&(_, rate)| rate)
        .fold(f64::INFINITY, f64::min);
    if !(decay > 0.0 && decay.is_finite()) {
        return Err(VarError::InvalidConstraint(format!(
            "first pass produced a non-localized state (slowest multiplier {decay})"
        )));
    }
    let grid = grid_for_decay(decay, tail, dx)?;
    theta_minimize(r, l, m, prm, &grid, &ThetaOptions { initial: None, ..opts.clone() })
}

/// Phase-aligns the envelopes and rolls the grid so the peak of `w` (or of
/// the first nonzero component) lands on the node at `x = 0`.
fn recenter(x: &Triple) -> Triple {
    let aligned = [engine::phase_align(&x[0]), engine::phase_align(&x[1]), x[2].clone()];
    let anchor = aligned
        .iter()
        .rev()
        .find(|f| f.l2_norm2() > 0.0)
        .unwrap_or(&aligned[2]);
    let peak = anchor
        .values()
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
        .map(|(j, _)| j)
        .unwrap_or(0);
    let shift = peak as isize - anchor.grid().center_index() as isize;
    [aligned[0].roll(shift), aligned[1].roll(shift), aligned[2].roll(shift)]
}

/// Periodic grid long enough that `exp(-sqrt(decay) L / 2)` falls below
/// `tail`, with spacing at most `dx` and a power-of-two number of points.
pub fn grid_for_decay(decay: f64, tail: f64, dx: f64) -> Result<Arc<Grid>, VarError> {
    if !(decay > 0.0 && tail > 0.0 && tail < 1.0 && dx > 0.0) {
        return Err(VarError::InvalidConstraint(format!(
            "decay {decay}, tail {tail} and dx {dx} must be positive with tail < 1"
        )));
    }
    let length = 2.0 * (1.0 / tail).ln() / decay.sqrt();
    let points = ((length / dx).ceil() as usize).next_power_of_two().max(64);
    Ok(make_grid(length, points)?)
}
