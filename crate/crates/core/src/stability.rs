//! Orbital stability experiments: perturb a solitary wave, evolve it, and
//! track the distance to its orbit under translations and envelope phases.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::evolve::{integrate_observed, EvolveError, IntegratorConfig, Status};
use crate::model::{Params21, Regime, State21};
use crate::spectral::Field;
use crate::varsolve::MinimizerResult;

#[derive(Debug, Error)]
pub enum StabilityError {
    #[error("stability experiments need globally well-posed parameters")]
    Hypothesis,
    #[error("perturbation size must be finite and nonnegative, got {0}")]
    InvalidDelta(f64),
    #[error("state and reference live on different grids")]
    GridMismatch,
    #[error(transparent)]
    Evolve(#[from] EvolveError),
}

/// Best orbit element found by [`orbit_fit`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitFit {
    pub distance: f64,
    /// Translation `y`: the reference is compared through `Φ(x + y)`.
    pub shift: f64,
    /// Envelope phases `θ_j`.
    pub phases: [f64; 2],
}

fn h1_weight(k: f64) -> f64 {
    1.0 + k * k
}

/// `⟨a, T_{m dx} b⟩_{H^1}` for every grid shift `m`, by one inverse FFT.
fn correlation(a: &Field, b: &Field) -> Vec<Complex64> {
    let grid = a.grid();
    let (sa, sb) = (a.spectrum(), b.spectrum());
    let k = grid.wavenumbers();
    let mut prod: Vec<Complex64> = (0..grid.points())
        .map(|n| sa[n].conj() * sb[n] * h1_weight(k[n]) * grid.length())
        .collect();
    grid.inverse_in_place(&mut prod);
    prod
}

/// Squared triple H^1 distance at shift `y` with the optimal phases.
fn distance2_at(s: &State21, reference: &State21, y: f64) -> (f64, [f64; 2]) {
    let mut total = 0.0;
    let mut phases = [0.0; 2];
    for j in 0..2 {
        let moved = reference.u(j).translate(y);
        let c = s.u(j).inner_h1(&moved);
        let theta = if c.norm() > 0.0 { -c.arg() } else { 0.0 };
        phases[j] = theta;
        total += moved.scale_complex(Complex64::from_polar(1.0, theta)).sub(s.u(j)).h1_norm2();
    }
    total += reference.v().translate(y).sub(s.v()).h1_norm2();
    (total, phases)
}

/// Approximates `inf_{y, θ1, θ2} ||(e^{iθ1} T_y Φ1, e^{iθ2} T_y Φ2, T_y w) - s||`
/// in the triple H^1 norm.
///
/// The phases are optimal in closed form for each `y`. The shift comes from
/// the peak of the FFT cross-correlation, refined by golden-section search
/// within one cell; the unshifted comparison is always among the candidates.
pub fn orbit_fit(s: &State21, reference: &State21) -> Result<OrbitFit, StabilityError> {
    if !s.u1().same_grid(reference.u1()) {
        return Err(StabilityError::GridMismatch);
    }
    let grid = s.grid().clone();
    let n = grid.points();
    let dx = grid.dx();
    let c1 = correlation(s.u1(), reference.u1());
    let c2 = correlation(s.u2(), reference.u2());
    let cw = correlation(s.v(), reference.v());
    let overlap = |m: usize| c1[m].norm() + c2[m].norm() + cw[m].re;
    let best = (0..n).max_by(|&a, &b| overlap(a).total_cmp(&overlap(b))).unwrap_or(0);
    let y0 = if best > n / 2 { best as f64 - n as f64 } else { best as f64 } * dx;

    let f = |y: f64| distance2_at(s, reference, y).0;
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (y0 - dx, y0 + dx);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > 1e-12 * dx.max(1.0) {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        }
    }
    let mut candidates = vec![0.0, y0, 0.5 * (lo + hi)];
    candidates.dedup();
    let (shift, (d2, phases)) = candidates
        .into_iter()
        .map(|y| (y, distance2_at(s, reference, y)))
        .min_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
        .expect("nonempty");
    Ok(OrbitFit {
        distance: d2.sqrt(),
        shift,
        phases,
    })
}

/// Distance from `s` to the symmetry orbit of `reference`.
pub fn orbit_distance(s: &State21, reference: &MinimizerResult) -> Result<f64, StabilityError> {
    Ok(orbit_fit(s, &reference.fields)?.distance)
}

fn triple_h1(fields: [&Field; 3]) -> f64 {
    fields.iter().map(|f| f.h1_norm2()).sum::<f64>().sqrt()
}

fn random_band_limited(rng: &mut ChaCha8Rng, like: &Field) -> Field {
    let grid = like.grid();
    let cutoff = grid.k_max() / 4.0;
    let k = grid.wavenumbers();
    let spec: Vec<Complex64> = (0..grid.points())
        .map(|n| {
            let re: f64 = rng.gen_range(-1.0..1.0);
            let im: f64 = rng.gen_range(-1.0..1.0);
            if k[n].abs() <= cutoff && !grid.is_nyquist(n) {
                Complex64::new(re, im)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    Field::from_spectrum(grid, &spec, like.kind())
}

/// Adds a reproducible band-limited random field (`|k| <= k_max / 4`) whose
/// triple H^1 norm is exactly `delta`.
pub fn perturb(reference: &MinimizerResult, delta: f64, seed: u64) -> Result<State21, StabilityError> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(StabilityError::InvalidDelta(delta));
    }
    let base = &reference.fields;
    if delta == 0.0 {
        return Ok(base.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = [
        random_band_limited(&mut rng, base.u1()),
        random_band_limited(&mut rng, base.u2()),
        random_band_limited(&mut rng, base.v()),
    ];
    let scale = delta / triple_h1([&noise[0], &noise[1], &noise[2]]);
    let [a, b, c] = noise;
    Ok(State21::new(
        base.u1().axpy(scale, &a),
        base.u2().axpy(scale, &b),
        base.v().axpy(scale, &c),
        base.time(),
    )
    .expect("perturbation keeps kinds and grid"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    /// The distance stayed below the threshold; `ratio = max_t d(t) / scale`.
    Stable { ratio: f64 },
    /// First monitored time at which the threshold was exceeded.
    Escaped { time: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityOptions {
    pub seed: u64,
    /// Escape threshold as a multiple of the perturbation size.
    pub amplification: f64,
    /// Distances are measured against `max(delta, floor)`, so unperturbed runs
    /// are judged against the solver residual rather than zero.
    pub floor: f64,
}

impl Default for StabilityOptions {
    fn default() -> Self {
        StabilityOptions {
            seed: 0,
            amplification: 10.0,
            floor: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityRecord {
    pub delta: f64,
    pub seed: u64,
    pub times: Vec<f64>,
    pub distances: Vec<f64>,
    pub drift_energy: Vec<f64>,
    pub drift_momentum: Vec<f64>,
    pub drift_q1: Vec<f64>,
    pub drift_q2: Vec<f64>,
    /// `max_t |Q(u_j)(t) - Q(u_j)(0)|` over both envelopes.
    pub max_mass_deviation: f64,
    pub max_distance: f64,
    pub verdict: Verdict,
    pub status: Status,
}

impl StabilityRecord {
    pub const CSV_HEADER: &'static str = "t,d,driftE,driftH,driftQ1,driftQ2";

    pub fn csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for i in 0..self.times.len() {
            let row = [
                self.times[i],
                self.distances[i],
                self.drift_energy[i],
                self.drift_momentum[i],
                self.drift_q1[i],
                self.drift_q2[i],
            ];
            out.push_str(&row.map(crate::format_float).join(","));
            out.push('\n');
        }
        out
    }
}

/// Perturbs `reference` by `delta`, evolves to `t_final` and samples the orbit
/// distance at every monitored step.
///
/// A blow-up guard stop counts as an escape at the last monitored time; NaNs
/// are reported as errors.
pub fn stability_experiment(
    reference: &MinimizerResult,
    delta: f64,
    t_final: f64,
    prm: &Params21,
    cfg: &IntegratorConfig,
    opts: &StabilityOptions,
) -> Result<StabilityRecord, StabilityError> {
    if prm.regime() != Regime::GlobalGuaranteed {
        return Err(StabilityError::Hypothesis);
    }
    let s0 = perturb(reference, delta, opts.seed)?;
    let mut times = Vec::new();
    let mut distances = Vec::new();
    let mut fit_error = None;
    let outcome = integrate_observed(&s0, prm, cfg, t_final, |state: &State21, _| {
        match orbit_fit(state, &reference.fields) {
            Ok(fit) => {
                times.push(state.time());
                distances.push(fit.distance);
            }
            Err(e) => fit_error = Some(e),
        }
    })?;
    if let Some(e) = fit_error {
        return Err(e);
    }
    if outcome.status == Status::NanDetected {
        let time = times.last().copied().unwrap_or(0.0);
        return Err(EvolveError::NanDetected { time }.into());
    }

    let reports = &outcome.reports;
    let q0 = &reports[0].values.masses;
    let max_mass_deviation = reports
        .iter()
        .flat_map(|r| r.values.masses.iter().zip(q0).map(|(q, q0)| (q - q0).abs()))
        .fold(0.0, f64::max);
    let scale = delta.max(opts.floor);
    let threshold = opts.amplification * scale;
    let max_distance = distances.iter().copied().fold(0.0, f64::max);
    let verdict = match distances.iter().position(|&d| d > threshold) {
        Some(i) => Verdict::Escaped { time: times[i] },
        None if outcome.status == Status::BlowupGuard => Verdict::Escaped {
            time: times.last().copied().unwrap_or(0.0),
        },
        None => Verdict::Stable {
            ratio: max_distance / scale,
        },
    };
    Ok(StabilityRecord {
        delta,
        seed: opts.seed,
        drift_energy: reports.iter().map(|r| r.drift_energy).collect(),
        drift_momentum: reports.iter().map(|r| r.drift_momentum).collect(),
        drift_q1: reports.iter().map(|r| r.drift_masses[0]).collect(),
        drift_q2: reports.iter().map(|r| r.drift_masses[1]).collect(),
        times,
        distances,
        max_mass_deviation,
        max_distance,
        verdict,
        status: outcome.status,
    })
}
