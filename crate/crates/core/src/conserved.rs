//! Conserved functionals and drift bookkeeping.
//!
//! Gradient terms are evaluated spectrally, potential terms by the
//! rectangle rule on the grid, which is spectrally accurate for smooth
//! periodic integrands.
//!
//! The momentum carries weight one on the envelope part,
//! `H = int v^2 + Im int sum_j u_j conj(u_j)_x`. With that weight `H` is
//! exactly conserved by the flow; see `doubled_envelope_weight_drifts` in the
//! integration tests.

use serde::Serialize;

use crate::model::{modulus_power, signed_pow, Params12, Params21, State12, State21};
use crate::spectral::Field;

/// `int |f|^2`.
pub fn mass(f: &Field) -> f64 {
    f.l2_norm2()
}

/// `Im int f conj(f)_x = -L sum_n k_n |c_n|^2`.
///
/// Uses the odd-symbol wavenumber so the Nyquist mode contributes nothing.
pub fn envelope_momentum(f: &Field) -> f64 {
    let grid = f.grid();
    -grid.weighted_norm2(&f.spectrum(), |n| grid.odd_wavenumber(n))
}

/// Kinetic and potential parts of an energy, `E = kinetic - potential`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParts {
    pub kinetic: f64,
    pub potential: f64,
}

impl EnergyParts {
    pub fn total(&self) -> f64 {
        self.kinetic - self.potential
    }

    /// Size of the round-off in `total`.
    pub fn scale(&self) -> f64 {
        self.kinetic.abs() + self.potential.abs()
    }
}

pub fn energy21_parts(s: &State21, prm: &Params21) -> EnergyParts {
    energy21_fields([s.u1(), s.u2(), s.v()], prm)
}

/// [`energy21_parts`] for a bare triple `(u1, u2, v)` on a common grid.
pub fn energy21_fields(f: [&Field; 3], prm: &Params21) -> EnergyParts {
    let kinetic = f.iter().map(|x| x.derivative_norm2()).sum();
    let tau = [prm.tau_j(0), prm.tau_j(1)];
    let (alpha, q) = (prm.alpha(), prm.q());
    let tau_v = prm.tau();
    let p2 = prm.p().plus(2);
    let mut potential = 0.0;
    for ((a, b), w) in f[0].values().iter().zip(f[1].values()).zip(f[2].values()) {
        let w = w.re;
        let (m1, m2) = (a.norm_sqr(), b.norm_sqr());
        potential += tau[0] * m1 * modulus_power(*a, q[0])
            + tau[1] * m2 * modulus_power(*b, q[1])
            + (alpha[0] * m1 + alpha[1] * m2) * w
            + tau_v * signed_pow(w, p2);
    }
    EnergyParts {
        kinetic,
        potential: potential * f[0].grid().dx(),
    }
}

/// Energy of the (2+1) system,
/// `int sum_j (|u_j'|^2 - tau_j |u_j|^{q_j+2} - alpha_j |u_j|^2 v) + |v'|^2 - tau v^{p+2}`.
pub fn energy21(s: &State21, prm: &Params21) -> f64 {
    energy21_parts(s, prm).total()
}

/// Momentum of the (2+1) system.
pub fn momentum_h(s: &State21) -> f64 {
    mass(s.v()) + envelope_momentum(s.u1()) + envelope_momentum(s.u2())
}

pub fn energy12_parts(s: &State12, prm: &Params12) -> EnergyParts {
    let kinetic = s.u().derivative_norm2() + s.v1().derivative_norm2() + s.v2().derivative_norm2();
    let (a, q, alpha) = (prm.a(), prm.q(), prm.alpha());
    let b = [prm.b_j(0), prm.b_j(1)];
    let exps = [prm.p()[0].plus(2), prm.p()[1].plus(2)];
    let mut potential = 0.0;
    for ((u, w1), w2) in s.u().values().iter().zip(s.v1().values()).zip(s.v2().values()) {
        let (w1, w2) = (w1.re, w2.re);
        let m = u.norm_sqr();
        potential += a * m * modulus_power(*u, q)
            + m * (alpha[0] * w1 + alpha[1] * w2)
            + b[0] * signed_pow(w1, exps[0])
            + b[1] * signed_pow(w2, exps[1]);
    }
    EnergyParts {
        kinetic,
        potential: potential * s.grid().dx(),
    }
}

/// Energy of the (1+2) system.
pub fn energy12(s: &State12, prm: &Params12) -> f64 {
    energy12_parts(s, prm).total()
}

/// Momentum of the (1+2) system, `int (v1^2 + v2^2) + Im int u conj(u)_x`.
pub fn momentum_g(s: &State12) -> f64 {
    mass(s.v1()) + mass(s.v2()) + envelope_momentum(s.u())
}

/// `|x - x0| / max(|x0|, 1e-12)`.
pub fn relative_drift(x: f64, x0: f64) -> f64 {
    (x - x0).abs() / x0.abs().max(1e-12)
}

/// Values of the conserved quantities at one instant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Invariants {
    pub energy: f64,
    pub momentum: f64,
    /// `[Q1, Q2]` for (2+1), `[Q]` for (1+2).
    pub masses: Vec<f64>,
}

pub fn invariants21(s: &State21, prm: &Params21) -> Invariants {
    Invariants {
        energy: energy21(s, prm),
        momentum: momentum_h(s),
        masses: vec![mass(s.u1()), mass(s.u2())],
    }
}

pub fn invariants12(s: &State12, prm: &Params12) -> Invariants {
    Invariants {
        energy: energy12(s, prm),
        momentum: momentum_g(s),
        masses: vec![mass(s.u())],
    }
}

/// Conserved quantities at time `t` together with their relative drifts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConservedReport {
    pub time: f64,
    pub values: Invariants,
    pub drift_energy: f64,
    pub drift_momentum: f64,
    pub drift_masses: Vec<f64>,
}

impl ConservedReport {
    pub fn new(time: f64, values: Invariants, initial: &Invariants) -> ConservedReport {
        let drift_masses = values
            .masses
            .iter()
            .zip(&initial.masses)
            .map(|(&q, &q0)| relative_drift(q, q0))
            .collect();
        ConservedReport {
            time,
            drift_energy: relative_drift(values.energy, initial.energy),
            drift_momentum: relative_drift(values.momentum, initial.momentum),
            drift_masses,
            values,
        }
    }

    /// Largest of all relative drifts.
    pub fn max_drift(&self) -> f64 {
        self.drift_masses
            .iter()
            .copied()
            .fold(self.drift_energy.max(self.drift_momentum), f64::max)
    }

    /// CSV header matching [`ConservedReport::csv_row`] for `n_masses` masses.
    pub fn csv_header(n_masses: usize) -> String {
        if n_masses == 1 {
            "t,K,G,Q,driftK,driftG,driftQ".to_string()
        } else {
            "t,E,H,Q1,Q2,driftE,driftH,driftQ1,driftQ2".to_string()
        }
    }

    pub fn csv_row(&self) -> String {
        let mut cols = vec![self.time, self.values.energy, self.values.momentum];
        cols.extend(&self.values.masses);
        cols.push(self.drift_energy);
        cols.push(self.drift_momentum);
        cols.extend(&self.drift_masses);
        cols.iter().map(|&x| crate::format_float(x)).collect::<Vec<_>>().join(",")
    }
}
