//! `Λ(r, l, m)` through the boost decomposition.
//!
//! Boosting real envelopes by `exp(i b x)` lowers the momentum by `b (r + l)`
//! and raises the energy by `b^2 (r + l)`. Splitting the momentum constraint
//! as `H = A - b (r + l)` with `A = ||w||^2` therefore gives
//!
//! ```text
//! Λ(r, l, m) = inf_{A >= 0} Θ(r, l, A) + b(A)^2 (r + l),   b(A) = (m - A) / (r + l)
//! ```
//!
//! and a minimizer is the Θ-minimizer at the optimal `A` boosted by `-b(A)`.

use std::sync::Arc;

use serde::Serialize;

use super::{boost, theta_minimize, MinimizerResult, ThetaOptions, VarError};
use crate::model::{Params21, State21};
use crate::spectral::Grid;

/// `b(A) = (m - A) / (r + l)`.
pub fn boost_parameter(r: f64, l: f64, m: f64, a: f64) -> f64 {
    (m - a) / (r + l)
}

#[derive(Debug, Clone)]
pub struct LambdaOptions {
    pub theta: ThetaOptions,
    /// Golden-section search stops once the bracket is narrower than this.
    pub width: f64,
}

impl Default for LambdaOptions {
    fn default() -> Self {
        LambdaOptions {
            theta: ThetaOptions::default(),
            width: 1e-6,
        }
    }
}

/// One evaluation of the reduced objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Probe {
    pub a: f64,
    pub theta: f64,
    pub objective: f64,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct LambdaResult {
    /// Boosted minimizer; `value` is `Λ`, `masses` is `(r, l, m)`.
    pub minimizer: MinimizerResult,
    /// Unboosted Θ-minimizer at `a_star`.
    pub profile: MinimizerResult,
    pub a_star: f64,
    pub b_star: f64,
    pub probes: Vec<Probe>,
    /// The optimum sits within two bracket widths of the search interval ends.
    pub boundary_hit: bool,
}

/// Search interval for `A`: `[0, m + 10 (r + l)]` when `m > 0`, else `[0, 10 (r + l)]`.
pub fn search_interval(r: f64, l: f64, m: f64) -> (f64, f64) {
    let base = 10.0 * (r + l);
    (0.0, if m > 0.0 { m + base } else { base })
}

pub fn lambda_minimize(
    r: f64,
    l: f64,
    m: f64,
    prm: &Params21,
    grid: &Arc<Grid>,
    opts: &LambdaOptions,
) -> Result<LambdaResult, VarError> {
    if !(r > 0.0 && l > 0.0 && r.is_finite() && l.is_finite() && m.is_finite()) {
        return Err(VarError::InvalidConstraint(format!(
            "need r, l > 0 and finite m, got ({r}, {l}, {m})"
        )));
    }
    let mut cache: Vec<(f64, MinimizerResult)> = Vec::new();
    let mut probes = Vec::new();
    let mut evaluate = |a: f64| -> Result<f64, VarError> {
        let warm: Option<State21> = cache
            .iter()
            .min_by(|x, y| (x.0 - a).abs().total_cmp(&(y.0 - a).abs()))
            .map(|(_, res)| res.fields.clone())
            .or_else(|| opts.theta.initial.clone());
        let theta_opts = ThetaOptions {
            initial: warm,
            ..opts.theta.clone()
        };
        let res = theta_minimize(r, l, a, prm, grid, &theta_opts)?;
        let b = boost_parameter(r, l, m, a);
        let objective = res.value + b * b * (r + l);
        probes.push(Probe {
            a,
            theta: res.value,
            objective,
            converged: res.converged,
        });
        cache.push((a, res));
        Ok(objective)
    };

    let (lo0, hi0) = search_interval(r, l, m);
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (lo0, hi0);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let mut f1 = evaluate(x1)?;
    let mut f2 = evaluate(x2)?;
    while hi - lo > opts.width {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = evaluate(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = evaluate(x2)?;
        }
    }

    let best = probes
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.objective.total_cmp(&b.1.objective))
        .map(|(i, _)| i)
        .expect("at least two probes");
    let a_star = probes[best].a;
    let lambda = probes[best].objective;
    let profile = cache.swap_remove(best).1;
    let b_star = boost_parameter(r, l, m, a_star);
    let boundary_hit = a_star - lo0 < 2.0 * opts.width || hi0 - a_star < 2.0 * opts.width;
    let iterations = cache.iter().map(|(_, res)| res.iterations).sum::<usize>() + profile.iterations;
    let minimizer = MinimizerResult {
        fields: boost(&profile.fields, -b_star),
        value: lambda,
        sigma: profile.sigma,
        c: profile.c,
        masses: [r, l, m],
        iterations,
        gradient_norm: profile.gradient_norm,
        converged: profile.converged,
    };
    Ok(LambdaResult {
        minimizer,
        profile,
        a_star,
        b_star,
        probes,
        boundary_hit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boost_parameter_arithmetic() {
        assert_eq!(boost_parameter(1.0, 1.0, 3.0, 1.0), 1.0);
        assert_eq!(boost_parameter(1.0, 1.0, 2.0, 2.0), 0.0);
        assert_eq!(search_interval(1.0, 1.0, 3.0), (0.0, 23.0));
        assert_eq!(search_interval(1.0, 1.0, -1.0), (0.0, 20.0));
    }
}
