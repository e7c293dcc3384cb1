//! Closed-form solitary profiles and traveling-wave assembly.
//!
//! A traveling wave of the (2+1) system has the form
//!
//! ```text
//! u_j(x, t) = exp(i w_j t) exp(i c (x - c t) / 2) phi_j(x - c t),   v(x, t) = w(x - c t)
//! ```
//!
//! with real profiles solving
//!
//! ```text
//! -phi_j'' + sigma_j phi_j = gamma_j |phi_j|^q_j phi_j + alpha_j phi_j w,   sigma_j = w_j - c^2 / 4
//! -w'' + c w = beta / (p + 1) w^{p+1} + 1/2 sum_j alpha_j phi_j^2
//! ```

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{modulus_power, signed_pow, ModelError, Params21, Rational, State21};
use crate::spectral::{Field, FieldKind, Grid};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WaveError {
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("mass-targeted profiles need exponent below 4, got {0}")]
    MassNotMonotone(f64),
    #[error("could not match the requested mass {0}")]
    MassNotReached(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn positive(name: &'static str, value: f64) -> Result<(), WaveError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(WaveError::NonPositive { name, value })
    }
}

fn sech(x: f64) -> f64 {
    let a = x.abs();
    if a > 700.0 {
        0.0
    } else {
        1.0 / a.cosh()
    }
}

/// Positive even solution of `-w'' + lambda3 w = beta / (p+1) w^{p+1}`:
/// `((p+1)(p+2) lambda3 / (2 beta))^{1/p} sech^{2/p}(p sqrt(lambda3) x / 2)`.
pub fn kdv_profile(p: Rational, beta: f64, lambda3: f64, grid: &Arc<Grid>) -> Result<Field, WaveError> {
    positive("beta", beta)?;
    positive("lambda3", lambda3)?;
    let pv = p.value();
    let amplitude = ((pv + 1.0) * (pv + 2.0) * lambda3 / (2.0 * beta)).powf(1.0 / pv);
    let width = 0.5 * pv * lambda3.sqrt();
    Ok(Field::from_real_fn(grid, |x| amplitude * sech(width * x).powf(2.0 / pv)))
}

/// Positive even solution of `-psi'' + lambda psi = gamma |psi|^q psi`:
/// `((q+2) lambda / (2 gamma))^{1/q} sech^{2/q}(q sqrt(lambda) x / 2)`.
/// Returned as a complex-valued field with zero imaginary part.
pub fn nls_profile(q: f64, gamma: f64, lambda: f64, grid: &Arc<Grid>) -> Result<Field, WaveError> {
    positive("q", q)?;
    positive("gamma", gamma)?;
    positive("lambda", lambda)?;
    let amplitude = ((q + 2.0) * lambda / (2.0 * gamma)).powf(1.0 / q);
    let width = 0.5 * q * lambda.sqrt();
    Ok(Field::from_real_fn(grid, |x| amplitude * sech(width * x).powf(2.0 / q)).as_complex())
}

/// Bisects on the frequency until the grid mass of `profile(lambda)` matches
/// `mass` to 1e-10 (relative for masses above one).
fn match_mass(
    mass: f64,
    exponent: f64,
    profile: impl Fn(f64) -> Result<Field, WaveError>,
) -> Result<(Field, f64), WaveError> {
    positive("mass", mass)?;
    if exponent >= 4.0 {
        return Err(WaveError::MassNotMonotone(exponent));
    }
    let grid_mass = |lambda: f64| profile(lambda).map(|f| f.l2_norm2());
    let (mut lo, mut hi) = (1.0, 1.0);
    let mut guard = 0;
    while grid_mass(hi)? < mass {
        hi *= 2.0;
        guard += 1;
        if guard > 200 {
            return Err(WaveError::MassNotReached(mass));
        }
    }
    while grid_mass(lo)? > mass {
        lo *= 0.5;
        guard += 1;
        if guard > 400 {
            return Err(WaveError::MassNotReached(mass));
        }
    }
    let tol = 1e-12 * mass.max(1.0);
    for _ in 0..300 {
        let mid = (lo * hi).sqrt();
        let m = grid_mass(mid)?;
        if (m - mass).abs() <= tol {
            return Ok((profile(mid)?, mid));
        }
        if m < mass {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    let mid = (lo * hi).sqrt();
    let f = profile(mid)?;
    if (f.l2_norm2() - mass).abs() <= 1e-10 * mass.max(1.0) {
        Ok((f, mid))
    } else {
        Err(WaveError::MassNotReached(mass))
    }
}

/// [`nls_profile`] with the frequency chosen so that the grid mass equals `mass`.
pub fn nls_profile_with_mass(q: f64, gamma: f64, mass: f64, grid: &Arc<Grid>) -> Result<(Field, f64), WaveError> {
    match_mass(mass, q, |lambda| nls_profile(q, gamma, lambda, grid))
}

/// [`kdv_profile`] with `lambda3` chosen so that the grid mass equals `mass`.
pub fn kdv_profile_with_mass(
    p: Rational,
    beta: f64,
    mass: f64,
    grid: &Arc<Grid>,
) -> Result<(Field, f64), WaveError> {
    match_mass(mass, p.value(), |lambda| kdv_profile(p, beta, lambda, grid))
}

/// Frequencies and speed of a traveling wave.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveParams {
    pub omega: [f64; 2],
    pub c: f64,
}

impl WaveParams {
    /// Builds the wave parameters from the profile multipliers.
    pub fn from_multipliers(sigma: [f64; 2], c: f64) -> WaveParams {
        WaveParams {
            omega: [sigma[0] + 0.25 * c * c, sigma[1] + 0.25 * c * c],
            c,
        }
    }

    pub fn sigma(&self, j: usize) -> f64 {
        self.omega[j] - 0.25 * self.c * self.c
    }
}

/// Samples the traveling wave built from real profiles at time `t`.
pub fn assemble_traveling(
    phi1: &Field,
    phi2: &Field,
    w: &Field,
    wave: &WaveParams,
    t: f64,
) -> Result<State21, ModelError> {
    let c = wave.c;
    let shift = -c * t;
    let envelope = |phi: &Field, omega: f64| {
        phi.translate(shift)
            .map_with_x(FieldKind::Complex, |x, z| z * Complex64::from_polar(1.0, omega * t + 0.5 * c * (x - c * t)))
    };
    State21::new(
        envelope(phi1, wave.omega[0]),
        envelope(phi2, wave.omega[1]),
        w.translate(shift),
        t,
    )
}

/// Pointwise residuals of the profile equations.
pub fn profile_residuals(
    phi: [&Field; 2],
    w: &Field,
    sigma: [f64; 2],
    c: f64,
    prm: &Params21,
) -> [Field; 3] {
    let (alpha, gamma, q) = (prm.alpha(), prm.gamma(), prm.q());
    let p1 = prm.p().plus(1);
    let flux = prm.beta() / p1.value();
    let wv = w.values();
    let envelope = |j: usize| {
        let d2 = phi[j].derivative(2);
        let values = phi[j]
            .values()
            .iter()
            .zip(d2.values())
            .zip(wv)
            .map(|((f, f2), w)| {
                -f2 + f * sigma[j] - f * (gamma[j] * modulus_power(*f, q[j])) - f * (alpha[j] * w.re)
            })
            .collect();
        Field::from_values(phi[j].grid(), values, FieldKind::Complex).expect("same grid")
    };
    let w2 = w.derivative(2);
    let long = wv
        .iter()
        .zip(w2.values())
        .zip(phi[0].values().iter().zip(phi[1].values()))
        .map(|((w, w2), (a, b))| {
            let r = -w2.re + c * w.re
                - flux * signed_pow(w.re, p1)
                - 0.5 * (alpha[0] * a.norm_sqr() + alpha[1] * b.norm_sqr());
            Complex64::new(r, 0.0)
        })
        .collect();
    [
        envelope(0),
        envelope(1),
        Field::from_values(w.grid(), long, FieldKind::Real).expect("same grid"),
    ]
}

/// Largest pointwise residual of the profile equations.
pub fn profile_residual(phi: [&Field; 2], w: &Field, sigma: [f64; 2], c: f64, prm: &Params21) -> f64 {
    profile_residuals(phi, w, sigma, c, prm)
        .iter()
        .map(Field::max_abs)
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;

    #[test]
    fn kdv_soliton_peak_and_mass() {
        let grid = make_grid(80.0, 512).unwrap();
        let one = Rational::integer(1).unwrap();
        let w = kdv_profile(one, 1.0, 1.0, &grid).unwrap();
        assert!((w.values()[grid.center_index()].re - 3.0).abs() < 1e-14);
        // int 9 sech^4(x/2) dx = 24.
        assert!((w.l2_norm2() - 24.0).abs() < 1e-10);
    }

    #[test]
    fn profiles_solve_their_equations() {
        let grid = make_grid(60.0, 1024).unwrap();
        let p = Rational::new(6, 5).unwrap();
        let w = kdv_profile(p, 2.0, 0.7, &grid).unwrap();
        let res = w.derivative(2).scale(-1.0).add(&w.scale(0.7)).sub(&crate::model::signed_power(&w, p.plus(1)).scale(2.0 / p.plus(1).value()));
        assert!(res.max_abs() < 1e-7, "{}", res.max_abs());

        let psi = nls_profile(3.0, 1.5, 1.3, &grid).unwrap();
        let nl = psi.map(FieldKind::Complex, |z| z * modulus_power(z, 3.0) * 1.5);
        let res = psi.derivative(2).scale(-1.0).add(&psi.scale(1.3)).sub(&nl);
        assert!(res.max_abs() < 1e-7, "{}", res.max_abs());
    }

    #[test]
    fn mass_targeting() {
        let grid = make_grid(60.0, 512).unwrap();
        let (f, lambda) = nls_profile_with_mass(2.0, 1.0, 2.0, &grid).unwrap();
        assert!((f.l2_norm2() - 2.0).abs() <= 1e-10);
        // Cubic case: mass = 4 sqrt(lambda), so lambda = 1/4.
        assert!((lambda - 0.25).abs() < 1e-8);
        let (w, _) = kdv_profile_with_mass(Rational::integer(1).unwrap(), 1.0, 24.0, &grid).unwrap();
        assert!((w.l2_norm2() - 24.0).abs() <= 1e-8);
        assert_eq!(
            nls_profile_with_mass(4.0, 1.0, 1.0, &grid).unwrap_err(),
            WaveError::MassNotMonotone(4.0)
        );
    }

    #[test]
    fn rejects_non_positive_inputs() {
        let grid = make_grid(20.0, 64).unwrap();
        assert!(nls_profile(2.0, 1.0, 0.0, &grid).is_err());
        assert!(kdv_profile(Rational::integer(1).unwrap(), -1.0, 1.0, &grid).is_err());
    }

    #[test]
    fn wave_params_roundtrip() {
        let wp = WaveParams::from_multipliers([0.5, 0.25], 2.0);
        assert_eq!(wp.omega, [1.5, 1.25]);
        assert_eq!(wp.sigma(1), 0.25);
    }
}
