//! Numerical toolkit for coupled Schrödinger / generalized KdV systems:
//! spectral discretization, time integration, conserved quantities, solitary
//! waves, constrained energy minimization and orbital stability experiments.

pub mod conserved;
pub mod evolve;
pub mod model;
pub mod spectral;
pub mod stability;
pub mod varsolve;
pub mod waves;

/// Formats a float with 17 significant digits, enough to round-trip.
pub fn format_float(x: f64) -> String {
    format!("{:.16e}", x)
}
