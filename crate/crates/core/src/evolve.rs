//! Time stepping for both coupled systems.
//!
//! The linear part is integrated exactly in Fourier space and the nonlinear
//! part by either an integrating-factor RK4 scheme (fourth order) or a Strang
//! splitting with an RK2 midpoint substep (second order).

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conserved::{invariants12, invariants21, ConservedReport, Invariants};
use crate::model::{
    CoupledSystem, Dispersion, ModelError, Params12, Params21, Regime, State, State21,
};
use crate::spectral::{Field, Grid};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvolveError {
    #[error("non-finite value encountered at t = {time}")]
    NanDetected { time: f64 },
    #[error("time step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("final time must be nonnegative and finite, got {0}")]
    InvalidHorizon(f64),
    #[error("time step {dt} exceeds the stability ceiling {ceiling}")]
    StepTooLarge { dt: f64, ceiling: f64 },
    #[error("monitor stride must be at least 1")]
    InvalidStride,
    #[error("parameters are outside the globally well-posed range")]
    NotGlobal,
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Ifrk4,
    Strang,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub scheme: Scheme,
    pub dealias: bool,
    /// Record a state and a conserved-quantity report every this many steps.
    pub monitor_stride: usize,
    /// Abort once any component's H^1 norm exceeds this. `None` means
    /// 1000 times the initial sum of H^1 norms.
    pub max_h1: Option<f64>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            dt: 1e-3,
            scheme: Scheme::Ifrk4,
            dealias: true,
            monitor_stride: 10,
            max_h1: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Completed,
    BlowupGuard,
    NanDetected,
}

/// Recorded states and reports. When the status is not `Completed` the last
/// recorded state is the last finite one.
#[derive(Debug, Clone)]
pub struct Trajectory<S> {
    pub states: Vec<S>,
    pub reports: Vec<ConservedReport>,
    pub status: Status,
}

/// Conserved quantities of a state, dispatched on the system type.
pub trait HasInvariants: CoupledSystem {
    fn invariants(&self, state: &Self::State) -> Invariants;
}

impl HasInvariants for Params21 {
    fn invariants(&self, state: &State21) -> Invariants {
        invariants21(state, self)
    }
}

impl HasInvariants for Params12 {
    fn invariants(&self, state: &crate::model::State12) -> Invariants {
        invariants12(state, self)
    }
}

type Spectra = [Vec<Complex64>; 3];

/// Precomputed propagators for one step size.
struct Propagators {
    h: f64,
    half: Spectra,
    full: Spectra,
}

impl Propagators {
    fn new(grid: &Grid, layout: [Dispersion; 3], h: f64) -> Propagators {
        let make = |t: f64| -> Spectra {
            let build = |d: Dispersion| (0..grid.points()).map(|n| d.propagator(grid, n, t)).collect();
            [build(layout[0]), build(layout[1]), build(layout[2])]
        };
        Propagators {
            h,
            half: make(0.5 * h),
            full: make(h),
        }
    }
}

fn apply(prop: &Spectra, v: &Spectra) -> Spectra {
    let f = |i: usize| prop[i].iter().zip(&v[i]).map(|(a, b)| a * b).collect();
    [f(0), f(1), f(2)]
}

/// `a + s * b`.
fn axpy(a: &Spectra, s: f64, b: &Spectra) -> Spectra {
    let f = |i: usize| a[i].iter().zip(&b[i]).map(|(x, y)| x + y * s).collect();
    [f(0), f(1), f(2)]
}

fn scaled(s: f64, a: Spectra) -> Spectra {
    a.map(|v| v.into_iter().map(|c| c * s).collect())
}

struct Stepper<'a, M: CoupledSystem> {
    model: &'a M,
    grid: Arc<Grid>,
    scheme: Scheme,
    dealias: bool,
    props: Propagators,
}

impl<'a, M: CoupledSystem> Stepper<'a, M> {
    fn new(model: &'a M, grid: Arc<Grid>, cfg: &IntegratorConfig, h: f64) -> Self {
        let props = Propagators::new(&grid, M::LAYOUT, h);
        Stepper {
            model,
            grid,
            scheme: cfg.scheme,
            dealias: cfg.dealias,
            props,
        }
    }

    fn set_step(&mut self, h: f64) {
        if h != self.props.h {
            self.props = Propagators::new(&self.grid, M::LAYOUT, h);
        }
    }

    fn n(&self, v: &Spectra) -> Spectra {
        self.model.nonlinear(&self.grid, v, self.dealias)
    }

    fn step(&self, v: &Spectra) -> Spectra {
        let h = self.props.h;
        let (e, e2) = (&self.props.half, &self.props.full);
        match self.scheme {
            Scheme::Ifrk4 => {
                let k1 = scaled(h, self.n(v));
                let k2 = scaled(h, self.n(&apply(e, &axpy(v, 0.5, &k1))));
                let ev = apply(e, v);
                let k3 = scaled(h, self.n(&axpy(&ev, 0.5, &k2)));
                let k4 = scaled(h, self.n(&axpy(&apply(e2, v), 1.0, &apply(e, &k3))));
                let e2v = apply(e2, v);
                let e2k1 = apply(e2, &k1);
                let ek23 = apply(e, &axpy(&k2, 1.0, &k3));
                let f = |i: usize| -> Vec<Complex64> {
                    (0..v[i].len())
                        .map(|n| e2v[i][n] + (e2k1[i][n] + 2.0 * ek23[i][n] + k4[i][n]) / 6.0)
                        .collect()
                };
                [f(0), f(1), f(2)]
            }
            Scheme::Strang => {
                let a = apply(e, v);
                let mid = axpy(&a, 0.5 * h, &self.n(&a));
                let b = axpy(&a, h, &self.n(&mid));
                apply(e, &b)
            }
        }
    }
}

fn spectra_of(state: &State) -> Spectra {
    [
        state.field(0).spectrum(),
        state.field(1).spectrum(),
        state.field(2).spectrum(),
    ]
}

fn state_from<M: CoupledSystem>(grid: &Arc<Grid>, v: &Spectra, t: f64) -> M::State {
    let fields = [
        Field::from_spectrum(grid, &v[0], M::LAYOUT[0].kind()),
        Field::from_spectrum(grid, &v[1], M::LAYOUT[1].kind()),
        Field::from_spectrum(grid, &v[2], M::LAYOUT[2].kind()),
    ];
    M::wrap(rebuild(fields, t))
}

fn rebuild(fields: [Field; 3], t: f64) -> State {
    // Fields come from one grid with the right kinds, so this cannot fail.
    crate::model::state_unchecked(fields, t)
}

fn spectra_finite(v: &Spectra) -> bool {
    v.iter().flatten().all(|c| c.re.is_finite() && c.im.is_finite())
}

fn h1_norms(grid: &Grid, v: &Spectra) -> [f64; 3] {
    let k = grid.wavenumbers();
    let f = |i: usize| grid.weighted_norm2(&v[i], |n| 1.0 + k[n] * k[n]).sqrt();
    [f(0), f(1), f(2)]
}

/// Largest step the integrator accepts for this state.
pub fn dt_ceiling<M: CoupledSystem>(state: &M::State, model: &M) -> f64 {
    0.5 / (1.0 + model.nonlinear_frequency(state))
}

/// One step of size `cfg.dt`.
pub fn step<M: CoupledSystem>(
    state: &M::State,
    model: &M,
    cfg: &IntegratorConfig,
) -> Result<M::State, EvolveError> {
    if !(cfg.dt > 0.0 && cfg.dt.is_finite()) {
        return Err(EvolveError::InvalidStep(cfg.dt));
    }
    step_by(state, model, cfg, cfg.dt)
}

/// One step of arbitrary (possibly negative) size `h`.
pub fn step_by<M: CoupledSystem>(
    state: &M::State,
    model: &M,
    cfg: &IntegratorConfig,
    h: f64,
) -> Result<M::State, EvolveError> {
    if !h.is_finite() {
        return Err(EvolveError::InvalidStep(h));
    }
    let raw = M::raw(state);
    let grid = raw.grid().clone();
    let stepper = Stepper::new(model, grid.clone(), cfg, h);
    let next = stepper.step(&spectra_of(raw));
    let t = raw.time() + h;
    if !spectra_finite(&next) {
        return Err(EvolveError::NanDetected { time: t });
    }
    Ok(state_from::<M>(&grid, &next, t))
}

/// Integrates to time `t_final`, recording states and conserved quantities
/// at the start, every `monitor_stride` steps and at the end.
pub fn integrate<M: CoupledSystem + HasInvariants>(
    s0: &M::State,
    model: &M,
    cfg: &IntegratorConfig,
    t_final: f64,
) -> Result<Trajectory<M::State>, EvolveError> {
    let mut states = Vec::new();
    let outcome = integrate_observed(s0, model, cfg, t_final, |s, _| states.push(s.clone()))?;
    Ok(Trajectory {
        states,
        reports: outcome.reports,
        status: outcome.status,
    })
}

/// Result of [`integrate_observed`].
#[derive(Debug, Clone)]
pub struct Outcome<S> {
    pub reports: Vec<ConservedReport>,
    pub status: Status,
    pub last: S,
}

/// Like [`integrate`] but hands every monitored state to `observer` instead
/// of storing it.
pub fn integrate_observed<M, F>(
    s0: &M::State,
    model: &M,
    cfg: &IntegratorConfig,
    t_final: f64,
    mut observer: F,
) -> Result<Outcome<M::State>, EvolveError>
where
    M: CoupledSystem + HasInvariants,
    F: FnMut(&M::State, &ConservedReport),
{
    if !(cfg.dt > 0.0 && cfg.dt.is_finite()) {
        return Err(EvolveError::InvalidStep(cfg.dt));
    }
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(EvolveError::InvalidHorizon(t_final));
    }
    if cfg.monitor_stride == 0 {
        return Err(EvolveError::InvalidStride);
    }
    let ceiling = dt_ceiling(s0, model);
    if cfg.dt > ceiling {
        return Err(EvolveError::StepTooLarge { dt: cfg.dt, ceiling });
    }

    let raw = M::raw(s0);
    let grid = raw.grid().clone();
    let t0 = raw.time();
    let mut v = spectra_of(raw);
    let initial_h1 = h1_norms(&grid, &v);
    let max_h1 = cfg
        .max_h1
        .unwrap_or_else(|| 1e3 * initial_h1.iter().sum::<f64>().max(f64::MIN_POSITIVE));

    let initial = model.invariants(s0);
    let mut reports = Vec::new();
    let record = |state: &M::State, reports: &mut Vec<ConservedReport>, observer: &mut F| {
        let report = ConservedReport::new(M::raw(state).time(), model.invariants(state), &initial);
        observer(state, &report);
        reports.push(report);
    };
    record(s0, &mut reports, &mut observer);

    let full_steps = (t_final / cfg.dt * (1.0 + 1e-12)).floor() as u64;
    let remainder = t_final - full_steps as f64 * cfg.dt;
    let partial = remainder > 1e-12 * cfg.dt.max(t_final);
    let total = full_steps + u64::from(partial);

    let mut stepper = Stepper::new(model, grid.clone(), cfg, cfg.dt);
    let mut last = s0.clone();
    let mut last_recorded = 0u64;
    let mut t_prev = t0;
    let mut status = Status::Completed;
    for step_index in 1..=total {
        let (h, t) = if step_index <= full_steps {
            (cfg.dt, t0 + step_index as f64 * cfg.dt)
        } else {
            (remainder, t0 + t_final)
        };
        stepper.set_step(h);
        let next = stepper.step(&v);
        if !spectra_finite(&next) {
            status = Status::NanDetected;
            if last_recorded + 1 != step_index {
                last = state_from::<M>(&grid, &v, t_prev);
                record(&last, &mut reports, &mut observer);
            }
            break;
        }
        t_prev = t;
        let over = h1_norms(&grid, &next).iter().any(|&x| x > max_h1);
        v = next;
        let monitor = step_index % cfg.monitor_stride as u64 == 0 || step_index == total;
        if monitor || over {
            last = state_from::<M>(&grid, &v, t);
            record(&last, &mut reports, &mut observer);
            last_recorded = step_index;
        }
        if over {
            status = Status::BlowupGuard;
            break;
        }
    }
    Ok(Outcome {
        reports,
        status,
        last,
    })
}

/// Sup-norm bound on a periodic domain of length `length`:
/// `||f||_inf^2 <= ||f|| ||f'|| + ||f||^2 / length`.
fn sup_bound2(norm2: f64, dnorm2: f64, length: f64) -> f64 {
    (norm2 * dnorm2).sqrt() + norm2 / length
}

/// Explicit upper bound for `sup_t ||(u1, u2, v)(t)||_{H^1}^2`, valid in the
/// globally well-posed regime.
///
/// The bound follows the usual energy argument with every constant made
/// explicit: with `Q_j` the envelope masses, `y(t) = sum ||u_j'||^2 + ||v'||^2`
/// and the periodic Gagliardo-Nirenberg inequality above, conservation of
/// energy and momentum gives `y <= F(y)` for an explicit sublinear `F`, so `y`
/// stays below the largest root of `y = F(y)`. The initial energy, momentum
/// and masses enter through upper bounds computed from the H^1 norms of the
/// data, so the result is monotone in the data's H^1 norm.
pub fn apriori_bound(s0: &State21, prm: &Params21) -> Result<f64, EvolveError> {
    if prm.regime() != Regime::GlobalGuaranteed {
        return Err(EvolveError::NotGlobal);
    }
    let length = s0.grid().length();
    let norms2: Vec<f64> = s0.fields().iter().map(Field::h1_norm2).collect();
    let total: f64 = norms2.iter().sum();
    if total == 0.0 {
        return Ok(0.0);
    }
    let q_mass = [norms2[0], norms2[1]];
    let v_mass0 = norms2[2];

    // Upper bounds of |E0| and |H0| in terms of H^1 norms.
    let sup2 = |n2: f64| sup_bound2(n2, n2, length);
    let alpha = prm.alpha();
    let q = prm.q();
    let p = prm.p().value();
    let tau = prm.tau();
    let sv0 = sup2(v_mass0).sqrt();
    let mut e0 = total;
    e0 += tau.abs() * sv0.powf(p) * v_mass0;
    for j in 0..2 {
        let sj = sup2(q_mass[j]).sqrt();
        e0 += prm.tau_j(j).abs() * sj.powf(q[j]) * q_mass[j] + alpha[j].abs() * sv0 * q_mass[j];
    }
    let h0 = v_mass0 + q_mass[0] + q_mass[1];

    let m_max = |y: f64| h0 + q_mass.iter().map(|&qj| (qj * y).sqrt()).sum::<f64>();
    let rhs = |y: f64| {
        let m = m_max(y);
        let sv = sup_bound2(m, y, length).sqrt();
        let mut f = e0 + tau.abs() * sv.powf(p) * m;
        for j in 0..2 {
            let sj = sup_bound2(q_mass[j], y, length).sqrt();
            f += alpha[j].abs() * sv * q_mass[j] + prm.tau_j(j).max(0.0) * sj.powf(q[j]) * q_mass[j];
        }
        f
    };

    // F is sublinear, so {y : y <= F(y)} is bounded. Scan geometrically for
    // its last point, then bisect the crossing just above it.
    let mut last_inside = None;
    let mut y = 1e-12;
    while y < 1e200 {
        if rhs(y) >= y {
            last_inside = Some(y);
        }
        y *= 2.0;
    }
    if rhs(y) >= y {
        return Err(EvolveError::NotGlobal);
    }
    let (mut lo, mut hi) = match last_inside {
        Some(y) => (y, 2.0 * y),
        None => (0.0, 1e-12),
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if rhs(mid) >= mid {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let y_star = hi;
    Ok(q_mass[0] + q_mass[1] + y_star + m_max(y_star))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Rational;
    use crate::spectral::{make_grid, FieldKind};
    use num_complex::Complex64;

    fn linear_params() -> Params21 {
        Params21::new([0.0, 0.0], [0.0, 0.0], 0.0, [2.0, 2.0], Rational::integer(1).unwrap()).unwrap()
    }

    fn gaussian_state(grid: &Arc<Grid>) -> State21 {
        State21::new(
            Field::from_complex_fn(grid, |x| Complex64::new((-x * x).exp(), 0.0)),
            Field::from_complex_fn(grid, |x| Complex64::from_polar((-(x - 1.0).powi(2)).exp(), 0.5 * x)),
            Field::from_real_fn(grid, |x| 0.5 * (-x * x / 2.0).exp()),
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn linear_step_is_exact() {
        let grid = make_grid(40.0, 128).unwrap();
        let s = gaussian_state(&grid);
        let cfg = IntegratorConfig {
            dt: 0.05,
            ..Default::default()
        };
        let out = step(&s, &linear_params(), &cfg).unwrap();
        let exact = [
            s.u1().apply_schrodinger_group(0.05),
            s.u2().apply_schrodinger_group(0.05),
            s.v().apply_airy_group(0.05),
        ];
        for (a, b) in out.fields().iter().zip(&exact) {
            let err = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            assert!(err <= 1e-13);
        }
        assert_eq!(out.time(), 0.05);
    }

    #[test]
    fn config_errors() {
        let grid = make_grid(40.0, 64).unwrap();
        let s = gaussian_state(&grid);
        let prm = Params21::reference();
        let bad = IntegratorConfig {
            dt: -1.0,
            ..Default::default()
        };
        assert_eq!(step(&s, &prm, &bad).unwrap_err(), EvolveError::InvalidStep(-1.0));
        assert!(matches!(
            integrate(&s, &prm, &IntegratorConfig::default(), f64::NAN),
            Err(EvolveError::InvalidHorizon(_))
        ));
        let huge = IntegratorConfig {
            dt: 10.0,
            ..Default::default()
        };
        assert!(matches!(integrate(&s, &prm, &huge, 1.0), Err(EvolveError::StepTooLarge { .. })));
    }

    #[test]
    fn zero_horizon_records_initial_state_only() {
        let grid = make_grid(40.0, 64).unwrap();
        let s = gaussian_state(&grid);
        let traj = integrate(&s, &Params21::reference(), &IntegratorConfig::default(), 0.0).unwrap();
        assert_eq!(traj.states.len(), 1);
        assert_eq!(traj.reports.len(), 1);
        assert_eq!(traj.status, Status::Completed);
    }

    #[test]
    fn partial_last_step_lands_on_horizon() {
        let grid = make_grid(40.0, 64).unwrap();
        let s = gaussian_state(&grid);
        let cfg = IntegratorConfig {
            dt: 0.03,
            monitor_stride: 4,
            ..Default::default()
        };
        let traj = integrate(&s, &Params21::reference(), &cfg, 0.1).unwrap();
        let last = traj.states.last().unwrap();
        assert!((last.time() - 0.1).abs() < 1e-15);
        assert_eq!(traj.reports.len(), 2);
    }

    #[test]
    fn blowup_guard_triggers() {
        let grid = make_grid(40.0, 64).unwrap();
        let s = gaussian_state(&grid);
        let cfg = IntegratorConfig {
            max_h1: Some(1e-3),
            ..Default::default()
        };
        let traj = integrate(&s, &Params21::reference(), &cfg, 1.0).unwrap();
        assert_eq!(traj.status, Status::BlowupGuard);
        assert_eq!(traj.states.len(), 2);
    }

    #[test]
    fn apriori_bound_basics() {
        let grid = make_grid(40.0, 128).unwrap();
        let s = gaussian_state(&grid);
        let prm = Params21::reference();
        let b = apriori_bound(&s, &prm).unwrap();
        let norm: f64 = s.fields().iter().map(Field::h1_norm2).sum();
        assert!(b.is_finite() && b >= norm);

        let zero = State21::new(
            Field::zeros(&grid, FieldKind::Complex),
            Field::zeros(&grid, FieldKind::Complex),
            Field::zeros(&grid, FieldKind::Real),
            0.0,
        )
        .unwrap();
        assert_eq!(apriori_bound(&zero, &prm).unwrap(), 0.0);

        let local = Params21::new([1.0; 2], [1.0; 2], 1.0, [2.0; 2], Rational::integer(2).unwrap()).unwrap();
        assert_eq!(apriori_bound(&s, &local).unwrap_err(), EvolveError::NotGlobal);
    }
}
