//! Strict subadditivity diagnostics for `Θ`.

use std::sync::Arc;

use serde::Serialize;

use super::{theta_minimize, ThetaOptions, VarError};
use crate::model::Params21;
use crate::spectral::Grid;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartOutcome {
    pub masses: [f64; 3],
    /// `None` for skipped (all-zero) parts and failed solves.
    pub value: Option<f64>,
    pub skipped: bool,
    pub converged: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubadditivityReport {
    pub total_masses: [f64; 3],
    pub total_value: f64,
    pub parts: Vec<PartOutcome>,
    /// `Θ(Σ r_i, Σ l_i, Σ m_i) - Σ Θ(r_i, l_i, m_i)`; `None` if a part failed.
    pub margin: Option<f64>,
}

/// Evaluates `Θ` at the component-wise sum of `splits` and at each part.
pub fn subadditivity_check(
    splits: &[[f64; 3]],
    prm: &Params21,
    grid: &Arc<Grid>,
    opts: &ThetaOptions,
) -> Result<SubadditivityReport, VarError> {
    let mut total = [0.0; 3];
    for part in splits {
        for i in 0..3 {
            total[i] += part[i];
        }
    }
    if total.iter().any(|&t| !(t > 0.0)) {
        return Err(VarError::InvalidConstraint(format!(
            "component sums must be positive, got {total:?}"
        )));
    }
    let whole = theta_minimize(total[0], total[1], total[2], prm, grid, opts)?;
    let mut parts = Vec::with_capacity(splits.len());
    let mut sum = Some(0.0);
    for part in splits {
        if part.iter().all(|&m| m == 0.0) {
            parts.push(PartOutcome {
                masses: *part,
                value: None,
                skipped: true,
                converged: true,
                error: None,
            });
            continue;
        }
        match theta_minimize(part[0], part[1], part[2], prm, grid, opts) {
            Ok(res) => {
                sum = sum.map(|s| s + res.value);
                parts.push(PartOutcome {
                    masses: *part,
                    value: Some(res.value),
                    skipped: false,
                    converged: res.converged,
                    error: None,
                });
            }
            Err(e) => {
                sum = None;
                parts.push(PartOutcome {
                    masses: *part,
                    value: None,
                    skipped: false,
                    converged: false,
                    error: Some(e.to_string()),
                });
            }
        }
    }
    Ok(SubadditivityReport {
        total_masses: total,
        total_value: whole.value,
        parts,
        margin: sum.map(|s| whole.value - s),
    })
}
