//! Preconditioned projected conjugate gradients on products of L^2 spheres.
//!
//! Every component is either pinned to a sphere `||x_i||^2 = target_i` or
//! free. The objective supplies half-gradients `H_i`, normalized so that the
//! first variation reads `dF = 2 sum_i Re <H_i, dx_i>` for every component.
//! Search directions use the Sobolev preconditioner `(s_i - d^2/dx^2)^{-1}`
//! projected onto the tangent space of the sphere, and the retraction rescales
//! back onto the sphere.

use num_complex::Complex64;

use crate::conserved::EnergyParts;
use crate::spectral::{Field, FieldKind};

pub(crate) type Triple = [Field; 3];

pub(crate) struct Problem<'a> {
    pub targets: [Option<f64>; 3],
    pub objective: &'a dyn Fn(&Triple) -> EnergyParts,
    pub gradient: &'a dyn Fn(&Triple) -> Triple,
    /// Optional `(every, map)`: every `every` iterations try `map` and keep it
    /// if the objective does not increase.
    pub symmetrize: Option<(usize, &'a dyn Fn(&Triple) -> Triple)>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Settings {
    pub tol: f64,
    pub max_iters: usize,
}

pub(crate) struct Outcome {
    pub fields: Triple,
    pub parts: EnergyParts,
    /// Multipliers `sigma_i = -Re <H_i, x_i> / ||x_i||^2` (zero for empty or free components).
    pub sigma: [f64; 3],
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

const MIN_SHIFT: f64 = 0.05;
const MAX_SHIFT: f64 = 100.0;

fn precondition(f: &Field, shift: f64) -> Field {
    let grid = f.grid();
    let k = grid.wavenumbers();
    let mut spec = f.spectrum();
    for (n, c) in spec.iter_mut().enumerate() {
        *c /= shift + k[n] * k[n];
    }
    Field::from_spectrum(grid, &spec, f.kind())
}

fn retract(y: &Field, target: Option<f64>) -> Field {
    match target {
        Some(t) => {
            let n2 = y.l2_norm2();
            if n2 > 0.0 {
                y.scale((t / n2).sqrt())
            } else {
                y.clone()
            }
        }
        None => y.clone(),
    }
}

/// Weight turning `||H_i + sigma_i x_i||` into the residual of the
/// corresponding Euler-Lagrange equation as usually written: real components
/// carry a full (not half) gradient.
fn residual_weight(f: &Field) -> f64 {
    match f.kind() {
        FieldKind::Real => 2.0,
        FieldKind::Complex => 1.0,
    }
}

struct Stationarity {
    sigma: [f64; 3],
    shifts: [f64; 3],
    residual: f64,
    scale: f64,
}

fn stationarity(problem: &Problem<'_>, x: &Triple, h: &Triple) -> Stationarity {
    let mut sigma = [0.0; 3];
    let mut shifts = [MIN_SHIFT; 3];
    let mut residual = 0.0;
    let mut scale = 1.0;
    for i in 0..3 {
        let n2 = x[i].l2_norm2();
        if n2 == 0.0 {
            residual += residual_weight(&x[i]) * h[i].l2_norm();
            continue;
        }
        let rayleigh = -x[i].inner(&h[i]).re / n2;
        shifts[i] = rayleigh.clamp(MIN_SHIFT, MAX_SHIFT);
        let w = residual_weight(&x[i]);
        scale += w * rayleigh.abs() * n2.sqrt();
        match problem.targets[i] {
            Some(_) => {
                sigma[i] = rayleigh;
                residual += w * h[i].axpy(rayleigh, &x[i]).l2_norm();
            }
            None => residual += w * h[i].l2_norm(),
        }
    }
    Stationarity {
        sigma,
        shifts,
        residual,
        scale,
    }
}

fn direction(problem: &Problem<'_>, x: &Triple, h: &Triple, shifts: &[f64; 3]) -> Triple {
    let one = |i: usize| {
        if problem.targets[i] == Some(0.0) {
            return Field::zeros(x[i].grid(), x[i].kind());
        }
        let ph = precondition(&h[i], shifts[i]);
        match problem.targets[i] {
            Some(_) => {
                let px = precondition(&x[i], shifts[i]);
                let denom = px.inner(&x[i]).re;
                let mu = if denom > 0.0 { ph.inner(&x[i]).re / denom } else { 0.0 };
                ph.axpy(-mu, &px)
            }
            None => ph,
        }
    };
    [one(0), one(1), one(2)]
}

fn dot(a: &Triple, b: &Triple) -> f64 {
    (0..3).map(|i| a[i].inner(&b[i]).re).sum()
}

/// Drops the radial part of `d` at `x` for pinned components.
fn to_tangent(problem: &Problem<'_>, x: &Triple, d: &Triple) -> Triple {
    let one = |i: usize| match problem.targets[i] {
        Some(_) => {
            let n2 = x[i].l2_norm2();
            if n2 > 0.0 {
                d[i].axpy(-x[i].inner(&d[i]).re / n2, &x[i])
            } else {
                d[i].clone()
            }
        }
        None => d[i].clone(),
    };
    [one(0), one(1), one(2)]
}

fn moved(problem: &Problem<'_>, x: &Triple, d: &Triple, t: f64) -> Triple {
    [
        retract(&x[0].axpy(-t, &d[0]), problem.targets[0]),
        retract(&x[1].axpy(-t, &d[1]), problem.targets[1]),
        retract(&x[2].axpy(-t, &d[2]), problem.targets[2]),
    ]
}

/// Bounds on the first trial step of each line search.
const MIN_TRIAL: f64 = 0.05;
const MAX_TRIAL: f64 = 4.0;

/// Restart the conjugate directions at least this often.
const RESTART: usize = 50;

/// Preconditioned Polak-Ribiere conjugate gradients with a safeguarded
/// parabolic line search.
pub(crate) fn minimize(problem: &Problem<'_>, start: Triple, settings: Settings) -> Outcome {
    let mut x: Triple = [
        retract(&start[0], problem.targets[0]),
        retract(&start[1], problem.targets[1]),
        retract(&start[2], problem.targets[2]),
    ];
    for i in 0..3 {
        if problem.targets[i] == Some(0.0) {
            x[i] = Field::zeros(x[i].grid(), x[i].kind());
        }
    }
    let mut parts = (problem.objective)(&x);
    let mut step: f64 = 1.0;
    let mut iterations = 0;
    let mut converged = false;
    let mut h = (problem.gradient)(&x);
    let mut stat = stationarity(problem, &x, &h);
    let mut prev: Option<(Triple, Triple, f64)> = None;
    let mut since_restart = 0;
    while iterations < settings.max_iters {
        if stat.residual <= settings.tol * stat.scale {
            converged = true;
            break;
        }
        iterations += 1;
        let g = direction(problem, &x, &h, &stat.shifts);
        let gh = dot(&h, &g);
        let mut d = g.clone();
        let mut steepest = true;
        if let Some((g_old, d_old, gh_old)) = prev.take() {
            if since_restart < RESTART && gh_old > 0.0 {
                let diff: Triple = [g[0].sub(&g_old[0]), g[1].sub(&g_old[1]), g[2].sub(&g_old[2])];
                let beta = (dot(&h, &diff) / gh_old).max(0.0);
                if beta > 0.0 {
                    let carried = to_tangent(problem, &x, &d_old);
                    let cand: Triple = [
                        g[0].axpy(beta, &carried[0]),
                        g[1].axpy(beta, &carried[1]),
                        g[2].axpy(beta, &carried[2]),
                    ];
                    if dot(&h, &cand) > 0.0 {
                        d = cand;
                        steepest = false;
                    }
                }
            }
        }
        if steepest {
            since_restart = 0;
        }
        since_restart += 1;
        // dE/dt along x - t d.
        let slope = -2.0 * dot(&h, &d);
        let slack = 1e-13 * parts.scale().max(1e-300);
        let current = parts.total();
        let mut accepted: Option<(Triple, EnergyParts, f64)> = None;
        let mut t = (2.0 * step).clamp(MIN_TRIAL, MAX_TRIAL);
        while t >= 1e-14 {
            let cand = moved(problem, &x, &d, t);
            let cp = (problem.objective)(&cand);
            if !cp.total().is_finite() {
                t *= 0.5;
                continue;
            }
            let curvature = (cp.total() - current - slope * t) / (t * t);
            if curvature > 0.0 && slope < 0.0 {
                let t_star = (-slope / (2.0 * curvature)).clamp(0.1 * t, 8.0 * t);
                if (t_star - t).abs() > 1e-3 * t {
                    let cand2 = moved(problem, &x, &d, t_star);
                    let cp2 = (problem.objective)(&cand2);
                    if cp2.total().is_finite() && cp2.total() < cp.total() && cp2.total() <= current + slack {
                        accepted = Some((cand2, cp2, t_star));
                        break;
                    }
                }
            }
            if cp.total() <= current + slack {
                accepted = Some((cand, cp, t));
                break;
            }
            t *= 0.5;
        }
        let Some((cand, cp, t)) = accepted else {
            if steepest {
                break;
            }
            // Retry from steepest descent before giving up.
            continue;
        };
        x = cand;
        parts = cp;
        step = t;
        prev = Some((g, d, gh));

        if let Some((every, map)) = problem.symmetrize {
            if every > 0 && iterations % every == 0 {
                let y = map(&x);
                let y: Triple = [
                    retract(&y[0], problem.targets[0]),
                    retract(&y[1], problem.targets[1]),
                    retract(&y[2], problem.targets[2]),
                ];
                let yp = (problem.objective)(&y);
                if yp.total() <= parts.total() {
                    x = y;
                    parts = yp;
                    prev = None;
                }
            }
        }
        h = (problem.gradient)(&x);
        stat = stationarity(problem, &x, &h);
    }
    if !converged && stat.residual <= settings.tol * stat.scale {
        converged = true;
    }
    Outcome {
        fields: x,
        parts,
        sigma: stat.sigma,
        residual: stat.residual,
        iterations,
        converged,
    }
}

/// Multiplies by `exp(-i arg f(x_peak))` where `x_peak` maximizes `|f|`.
pub(crate) fn phase_align(f: &Field) -> Field {
    let peak = f
        .values()
        .iter()
        .max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr()))
        .copied()
        .unwrap_or(Complex64::new(0.0, 0.0));
    if peak.norm() == 0.0 || f.kind() == FieldKind::Real {
        return f.clone();
    }
    f.scale_complex(Complex64::from_polar(1.0, -peak.arg()))
}
