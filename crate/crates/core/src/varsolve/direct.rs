//! Direct minimization of the energy under `Q(h1) = r`, `Q(h2) = l`, `H = m`.
//!
//! Independent of the boost decomposition: the momentum constraint is
//! handled by an augmented Lagrangian while the two mass constraints are
//! kept exact by projection. Used to cross-check [`super::lambda_minimize`].

use std::sync::Arc;

use super::engine::{self, Problem, Settings, Triple};
use super::{check_hypotheses, gradient_fields, start_from, MinimizerResult, VarError};
use crate::conserved::{energy21_fields, envelope_momentum, EnergyParts};
use crate::model::{Params21, State21};
use crate::spectral::{Field, Grid};

#[derive(Debug, Clone)]
pub struct DirectOptions {
    pub tol: f64,
    pub max_iters: usize,
    /// Penalty weight of the augmented Lagrangian.
    pub rho: f64,
    pub max_outer: usize,
    /// Required accuracy of the momentum constraint.
    pub constraint_tol: f64,
    pub initial: Option<State21>,
}

impl Default for DirectOptions {
    fn default() -> Self {
        DirectOptions {
            tol: 1e-8,
            max_iters: 5_000,
            rho: 1.0,
            max_outer: 60,
            constraint_tol: 1e-7,
            initial: None,
        }
    }
}

fn momentum(x: &Triple) -> f64 {
    x[2].l2_norm2() + envelope_momentum(&x[0]) + envelope_momentum(&x[1])
}

/// Minimizes `E` subject to `Q(h1) = r`, `Q(h2) = l`, `H(h1, h2, g) = m`.
/// The returned multipliers are those of the mass constraints (`sigma`) and
/// of the momentum constraint (`c`).
pub fn direct_lambda_minimize(
    r: f64,
    l: f64,
    m: f64,
    prm: &Params21,
    grid: &Arc<Grid>,
    opts: &DirectOptions,
) -> Result<MinimizerResult, VarError> {
    check_hypotheses(prm)?;
    if !(r > 0.0 && l > 0.0 && m.is_finite()) {
        return Err(VarError::InvalidConstraint(format!(
            "need r, l > 0 and finite m, got ({r}, {l}, {m})"
        )));
    }
    let mut x = start_from(opts.initial.as_ref(), grid, prm)?;
    if opts.initial.is_none() {
        let w_mass = m.abs().max(0.5);
        x[2] = x[2].scale((w_mass / x[2].l2_norm2()).sqrt());
    }
    let mut mu = 0.0;
    let mut total_iters = 0;
    let mut last = None;
    for _ in 0..opts.max_outer {
        let rho = opts.rho;
        let objective = |y: &Triple| -> EnergyParts {
            let e = energy21_fields([&y[0], &y[1], &y[2]], prm);
            let c = momentum(y) - m;
            EnergyParts {
                kinetic: e.kinetic + mu * c + 0.5 * rho * c * c,
                potential: e.potential,
            }
        };
        let gradient = |y: &Triple| -> Triple {
            let [g1, g2, gw] = gradient_fields([&y[0], &y[1], &y[2]], prm);
            let kappa = mu + rho * (momentum(y) - m);
            let push = |g: Field, h: &Field| {
                let dh = h.derivative(1).scale_complex(num_complex::Complex64::new(0.0, kappa));
                g.add(&dh)
            };
            [push(g1, &y[0]), push(g2, &y[1]), gw.scale(0.5).axpy(kappa, &y[2])]
        };
        let problem = Problem {
            targets: [Some(r), Some(l), None],
            objective: &objective,
            gradient: &gradient,
            symmetrize: None,
        };
        let out = engine::minimize(
            &problem,
            x.clone(),
            Settings {
                tol: opts.tol,
                max_iters: opts.max_iters,
            },
        );
        total_iters += out.iterations;
        x = out.fields.clone();
        let violation = momentum(&x) - m;
        let converged = out.converged && violation.abs() <= opts.constraint_tol;
        last = Some((out, mu + rho * violation, converged));
        if converged {
            break;
        }
        mu += rho * violation;
    }
    let (out, kappa, converged) = last.expect("at least one outer iteration");
    let value = energy21_fields([&x[0], &x[1], &x[2]], prm).total();
    let [a, b, c] = x;
    Ok(MinimizerResult {
        fields: State21::new(a, b, c, 0.0)?,
        value,
        sigma: [out.sigma[0], out.sigma[1]],
        c: kappa,
        masses: [r, l, m],
        iterations: total_iters,
        gradient_norm: out.residual,
        converged,
    })
}
