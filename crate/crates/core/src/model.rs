//! Parameters, states and right-hand sides of the two coupled systems.
//!
//! The (2+1) system couples two Schrödinger envelopes `u1, u2` to one real
//! long wave `v`:
//!
//! ```text
//! i u_jt + u_jxx + gamma_j |u_j|^q_j u_j = -alpha_j u_j v
//! v_t + v_xxx + beta v^p v_x = -1/2 d/dx (alpha_1 |u_1|^2 + alpha_2 |u_2|^2)
//! ```
//!
//! The (1+2) system couples one envelope `u` to two long waves `v1, v2`:
//!
//! ```text
//! i u_t + u_xx + gamma |u|^q u = -alpha_1 u v_1 - alpha_2 u v_2
//! v_jt + v_jxxx + beta_j v_j^p_j v_jx = -1/2 alpha_j d/dx |u|^2
//! ```
//!
//! Real powers of the real field use the signed convention of
//! [`signed_power`], which is why the long-wave exponents are odd-denominator
//! rationals.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spectral::{Field, FieldKind, Grid};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("exponent {num}/{den} has an even denominator; v^p is only defined for odd denominators")]
    EvenDenominator { num: u64, den: u64 },
    #[error("exponent denominator must be nonzero")]
    ZeroDenominator,
    #[error("exponent must be positive")]
    NonPositiveExponent,
    #[error("cannot parse rational exponent from {0:?}")]
    ParseRational(String),
    #[error("parameter {name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },
    #[error("nonlinearity exponent {name} must be positive, got {value}")]
    NonPositivePower { name: &'static str, value: f64 },
    #[error("state fields live on different grids")]
    GridMismatch,
    #[error("component {index} must be {expected:?}-valued")]
    KindMismatch { index: usize, expected: FieldKind },
}

/// Positive rational `num/den` in lowest terms with odd denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rational {
    num: u64,
    den: u64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

impl Rational {
    /// Reduces to lowest terms and rejects even denominators.
    pub fn new(num: u64, den: u64) -> Result<Rational, ModelError> {
        if den == 0 {
            return Err(ModelError::ZeroDenominator);
        }
        if num == 0 {
            return Err(ModelError::NonPositiveExponent);
        }
        let g = gcd(num, den);
        let (num, den) = (num / g, den / g);
        if den % 2 == 0 {
            return Err(ModelError::EvenDenominator { num, den });
        }
        Ok(Rational { num, den })
    }

    pub fn integer(n: u64) -> Result<Rational, ModelError> {
        Rational::new(n, 1)
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `self + k`, still with odd denominator.
    pub fn plus(&self, k: u64) -> Rational {
        Rational {
            num: self.num + k * self.den,
            den: self.den,
        }
    }

    /// True when `x^self` is odd in `x` under the signed convention.
    pub fn is_odd(&self) -> bool {
        self.num % 2 == 1
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for Rational {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ModelError::ParseRational(s.to_string());
        let trimmed = s.trim();
        let (num, den) = match trimmed.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (trimmed, "1"),
        };
        let num: u64 = num.parse().map_err(|_| bad())?;
        let den: u64 = den.parse().map_err(|_| bad())?;
        Rational::new(num, den)
    }
}

impl Serialize for Rational {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Text(String),
            Int(u64),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Repr::Int(n) => Rational::integer(n).map_err(serde::de::Error::custom),
        }
    }
}

/// `x^{n/d}` for real `x` with odd `d`: `sign(x)^n |x|^{n/d}`.
pub fn signed_pow(x: f64, p: Rational) -> f64 {
    let magnitude = if p.den == 1 && p.num <= 8 {
        x.abs().powi(p.num as i32)
    } else {
        x.abs().powf(p.value())
    };
    if x < 0.0 && p.is_odd() {
        -magnitude
    } else {
        magnitude
    }
}

/// Pointwise [`signed_pow`] of a real field.
pub fn signed_power(v: &Field, p: Rational) -> Field {
    v.map(FieldKind::Real, |c| Complex64::new(signed_pow(c.re, p), 0.0))
}

/// `|z|^q z`.
pub fn power_nonlinearity(z: Complex64, q: f64) -> Complex64 {
    z * modulus_power(z, q)
}

/// `|z|^q`, avoiding `powf` for the cubic case.
pub fn modulus_power(z: Complex64, q: f64) -> f64 {
    let n2 = z.norm_sqr();
    if q == 2.0 {
        n2
    } else if q == 4.0 {
        n2 * n2
    } else if n2 == 0.0 {
        0.0
    } else {
        n2.powf(0.5 * q)
    }
}

/// Well-posedness class of a parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// Energy and momentum control the H^1 norm for all time.
    GlobalGuaranteed,
    /// Only local existence is available (or not even that when p < 1).
    LocalOnly,
}

fn check_finite(name: &'static str, value: f64) -> Result<(), ModelError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(ModelError::NonFinite { name, value })
    }
}

fn check_power(name: &'static str, value: f64) -> Result<(), ModelError> {
    check_finite(name, value)?;
    if value > 0.0 {
        Ok(())
    } else {
        Err(ModelError::NonPositivePower { name, value })
    }
}

/// Energy weight `2 gamma / (q + 2)` of an envelope nonlinearity.
pub fn envelope_weight(gamma: f64, q: f64) -> f64 {
    2.0 * gamma / (q + 2.0)
}

/// Energy weight `2 beta / ((p + 1)(p + 2))` of a long-wave nonlinearity.
pub fn long_wave_weight(beta: f64, p: Rational) -> f64 {
    let p = p.value();
    2.0 * beta / ((p + 1.0) * (p + 2.0))
}

fn long_wave_regime_ok(p: Rational) -> bool {
    let p = p.value();
    (1.0..4.0 / 3.0).contains(&p)
}

/// Parameters of the (2+1) system.
#[derive(Debug, Clone, PartialEq)]
pub struct Params21 {
    alpha: [f64; 2],
    gamma: [f64; 2],
    beta: f64,
    q: [f64; 2],
    p: Rational,
}

impl Params21 {
    pub fn new(
        alpha: [f64; 2],
        gamma: [f64; 2],
        beta: f64,
        q: [f64; 2],
        p: Rational,
    ) -> Result<Params21, ModelError> {
        check_finite("alpha1", alpha[0])?;
        check_finite("alpha2", alpha[1])?;
        check_finite("gamma1", gamma[0])?;
        check_finite("gamma2", gamma[1])?;
        check_finite("beta", beta)?;
        check_power("q1", q[0])?;
        check_power("q2", q[1])?;
        Ok(Params21 {
            alpha,
            gamma,
            beta,
            q,
            p,
        })
    }

    /// All couplings one, cubic envelopes, quadratic long wave.
    pub fn reference() -> Params21 {
        Params21::new([1.0, 1.0], [1.0, 1.0], 1.0, [2.0, 2.0], Rational { num: 1, den: 1 })
            .expect("reference parameters are admissible")
    }

    pub fn alpha(&self) -> [f64; 2] {
        self.alpha
    }

    pub fn gamma(&self) -> [f64; 2] {
        self.gamma
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn q(&self) -> [f64; 2] {
        self.q
    }

    pub fn p(&self) -> Rational {
        self.p
    }

    pub fn tau_j(&self, j: usize) -> f64 {
        envelope_weight(self.gamma[j], self.q[j])
    }

    pub fn tau(&self) -> f64 {
        long_wave_weight(self.beta, self.p)
    }

    /// True when the long-wave exponent admits the local theory (p >= 1).
    pub fn has_local_theory(&self) -> bool {
        self.p.value() >= 1.0
    }

    pub fn regime(&self) -> Regime {
        let envelopes_ok = (0..2).all(|j| self.tau_j(j) <= 0.0 || self.q[j] < 4.0);
        if long_wave_regime_ok(self.p) && envelopes_ok {
            Regime::GlobalGuaranteed
        } else {
            Regime::LocalOnly
        }
    }
}

/// Parameters of the (1+2) system.
#[derive(Debug, Clone, PartialEq)]
pub struct Params12 {
    gamma: f64,
    q: f64,
    alpha: [f64; 2],
    beta: [f64; 2],
    p: [Rational; 2],
}

impl Params12 {
    pub fn new(
        gamma: f64,
        q: f64,
        alpha: [f64; 2],
        beta: [f64; 2],
        p: [Rational; 2],
    ) -> Result<Params12, ModelError> {
        check_finite("gamma", gamma)?;
        check_power("q", q)?;
        check_finite("alpha1", alpha[0])?;
        check_finite("alpha2", alpha[1])?;
        check_finite("beta1", beta[0])?;
        check_finite("beta2", beta[1])?;
        Ok(Params12 {
            gamma,
            q,
            alpha,
            beta,
            p,
        })
    }

    pub fn reference() -> Params12 {
        let one = Rational { num: 1, den: 1 };
        Params12::new(1.0, 2.0, [1.0, 1.0], [1.0, 1.0], [one, one])
            .expect("reference parameters are admissible")
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn alpha(&self) -> [f64; 2] {
        self.alpha
    }

    pub fn beta(&self) -> [f64; 2] {
        self.beta
    }

    pub fn p(&self) -> [Rational; 2] {
        self.p
    }

    pub fn a(&self) -> f64 {
        envelope_weight(self.gamma, self.q)
    }

    pub fn b_j(&self, j: usize) -> f64 {
        long_wave_weight(self.beta[j], self.p[j])
    }

    pub fn has_local_theory(&self) -> bool {
        self.p.iter().all(|p| p.value() >= 1.0)
    }

    pub fn regime(&self) -> Regime {
        let envelope_ok = self.a() <= 0.0 || self.q < 4.0;
        if self.p.iter().all(|&p| long_wave_regime_ok(p)) && envelope_ok {
            Regime::GlobalGuaranteed
        } else {
            Regime::LocalOnly
        }
    }
}

/// Free-propagation operator attached to one component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dispersion {
    /// `u_t = i u_xx`.
    Schrodinger,
    /// `v_t = -v_xxx`.
    Airy,
}

impl Dispersion {
    pub fn kind(self) -> FieldKind {
        match self {
            Dispersion::Schrodinger => FieldKind::Complex,
            Dispersion::Airy => FieldKind::Real,
        }
    }

    /// Linear symbol `exp(L(k) t)` at FFT index `n`.
    pub fn propagator(self, grid: &Grid, n: usize, t: f64) -> Complex64 {
        match self {
            Dispersion::Schrodinger => crate::spectral::schrodinger_symbol(grid.wavenumbers()[n], t),
            Dispersion::Airy => crate::spectral::airy_symbol(grid.odd_wavenumber(n), t),
        }
    }
}

/// Three-component state on a common grid at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    fields: [Field; 3],
    time: f64,
}

impl State {
    fn build(fields: [Field; 3], time: f64, layout: [Dispersion; 3]) -> Result<State, ModelError> {
        if !(fields[0].same_grid(&fields[1]) && fields[0].same_grid(&fields[2])) {
            return Err(ModelError::GridMismatch);
        }
        for (index, (field, d)) in fields.iter().zip(layout).enumerate() {
            if d.kind() == FieldKind::Real && field.kind() != FieldKind::Real {
                return Err(ModelError::KindMismatch {
                    index,
                    expected: FieldKind::Real,
                });
            }
        }
        let fields = [
            coerce(&fields[0], layout[0]),
            coerce(&fields[1], layout[1]),
            coerce(&fields[2], layout[2]),
        ];
        Ok(State { fields, time })
    }

    pub fn fields(&self) -> &[Field; 3] {
        &self.fields
    }

    pub fn into_fields(self) -> [Field; 3] {
        self.fields
    }

    pub fn field(&self, index: usize) -> &Field {
        &self.fields[index]
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.fields[0].grid()
    }

    pub fn with_time(mut self, time: f64) -> State {
        self.time = time;
        self
    }

    pub fn is_finite(&self) -> bool {
        self.fields.iter().all(Field::is_finite)
    }
}

/// Assembles a state whose fields are already known to be consistent.
pub(crate) fn state_unchecked(fields: [Field; 3], time: f64) -> State {
    State { fields, time }
}

fn coerce(field: &Field, d: Dispersion) -> Field {
    match d {
        Dispersion::Schrodinger => field.as_complex(),
        Dispersion::Airy => field.clone(),
    }
}

/// State of the (2+1) system: `(u1, u2, v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct State21(pub(crate) State);

impl State21 {
    pub const LAYOUT: [Dispersion; 3] =
        [Dispersion::Schrodinger, Dispersion::Schrodinger, Dispersion::Airy];

    pub fn new(u1: Field, u2: Field, v: Field, t: f64) -> Result<State21, ModelError> {
        State::build([u1, u2, v], t, Self::LAYOUT).map(State21)
    }

    pub fn u1(&self) -> &Field {
        self.0.field(0)
    }

    pub fn u2(&self) -> &Field {
        self.0.field(1)
    }

    pub fn u(&self, j: usize) -> &Field {
        self.0.field(j)
    }

    pub fn v(&self) -> &Field {
        self.0.field(2)
    }

    pub fn time(&self) -> f64 {
        self.0.time()
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.0.grid()
    }

    pub fn fields(&self) -> &[Field; 3] {
        self.0.fields()
    }

    pub fn with_time(self, t: f64) -> State21 {
        State21(self.0.with_time(t))
    }
}

/// State of the (1+2) system: `(u, v1, v2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct State12(pub(crate) State);

impl State12 {
    pub const LAYOUT: [Dispersion; 3] = [Dispersion::Schrodinger, Dispersion::Airy, Dispersion::Airy];

    pub fn new(u: Field, v1: Field, v2: Field, t: f64) -> Result<State12, ModelError> {
        State::build([u, v1, v2], t, Self::LAYOUT).map(State12)
    }

    pub fn u(&self) -> &Field {
        self.0.field(0)
    }

    pub fn v1(&self) -> &Field {
        self.0.field(1)
    }

    pub fn v2(&self) -> &Field {
        self.0.field(2)
    }

    pub fn v(&self, j: usize) -> &Field {
        self.0.field(1 + j)
    }

    pub fn time(&self) -> f64 {
        self.0.time()
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.0.grid()
    }

    pub fn fields(&self) -> &[Field; 3] {
        self.0.fields()
    }

    pub fn with_time(self, t: f64) -> State12 {
        State12(self.0.with_time(t))
    }
}

/// Interface shared by both systems so one integrator drives either.
pub trait CoupledSystem: Sync {
    type State: Clone + Send;

    const LAYOUT: [Dispersion; 3];

    fn raw(state: &Self::State) -> &State;

    fn wrap(state: State) -> Self::State;

    /// Nonlinear part of the right-hand side in spectral space. Inputs and
    /// outputs are spectra in FFT order; with `dealias` the inputs are
    /// truncated before the pointwise products and the output afterwards.
    fn nonlinear(&self, grid: &Grid, spectra: &[Vec<Complex64>; 3], dealias: bool) -> [Vec<Complex64>; 3];

    /// Rough bound for the pointwise frequency of the nonlinear terms, used to
    /// sanity-check step sizes.
    fn nonlinear_frequency(&self, state: &Self::State) -> f64;
}

fn prepare(grid: &Grid, spectrum: &[Complex64], dealias: bool) -> Vec<Complex64> {
    let mut s = spectrum.to_vec();
    if dealias {
        grid.dealias_in_place(&mut s);
    }
    grid.inverse_in_place(&mut s);
    s
}

/// `-ik * FFT(flux)` with the odd-symbol convention, optionally dealiased.
fn conservative_derivative(grid: &Grid, mut flux: Vec<Complex64>, dealias: bool) -> Vec<Complex64> {
    grid.forward_in_place(&mut flux);
    for (n, c) in flux.iter_mut().enumerate() {
        *c *= Complex64::new(0.0, -grid.odd_wavenumber(n));
    }
    if dealias {
        grid.dealias_in_place(&mut flux);
    }
    flux
}

fn to_spectrum(grid: &Grid, mut values: Vec<Complex64>, dealias: bool) -> Vec<Complex64> {
    grid.forward_in_place(&mut values);
    if dealias {
        grid.dealias_in_place(&mut values);
    }
    values
}

impl CoupledSystem for Params21 {
    type State = State21;

    const LAYOUT: [Dispersion; 3] = State21::LAYOUT;

    fn raw(state: &State21) -> &State {
        &state.0
    }

    fn wrap(state: State) -> State21 {
        State21(state)
    }

    fn nonlinear(&self, grid: &Grid, spectra: &[Vec<Complex64>; 3], dealias: bool) -> [Vec<Complex64>; 3] {
        let u1 = prepare(grid, &spectra[0], dealias);
        let u2 = prepare(grid, &spectra[1], dealias);
        let v = prepare(grid, &spectra[2], dealias);
        let i = Complex64::new(0.0, 1.0);
        let p1 = self.p.plus(1);
        let flux_weight = self.beta / p1.value();
        let mut du1 = Vec::with_capacity(u1.len());
        let mut du2 = Vec::with_capacity(u1.len());
        let mut flux = Vec::with_capacity(u1.len());
        for ((a, b), w) in u1.iter().zip(&u2).zip(&v) {
            let w = w.re;
            du1.push(i * (power_nonlinearity(*a, self.q[0]) * self.gamma[0] + a * (self.alpha[0] * w)));
            du2.push(i * (power_nonlinearity(*b, self.q[1]) * self.gamma[1] + b * (self.alpha[1] * w)));
            let f = flux_weight * signed_pow(w, p1)
                + 0.5 * (self.alpha[0] * a.norm_sqr() + self.alpha[1] * b.norm_sqr());
            flux.push(Complex64::new(f, 0.0));
        }
        [
            to_spectrum(grid, du1, dealias),
            to_spectrum(grid, du2, dealias),
            conservative_derivative(grid, flux, dealias),
        ]
    }

    fn nonlinear_frequency(&self, state: &State21) -> f64 {
        let k = state.grid().dealias_cutoff();
        let v = state.v().max_abs();
        let mut freq = self.beta.abs() * v.powf(self.p.value()) * k;
        for j in 0..2 {
            let u = state.u(j).max_abs();
            freq += self.gamma[j].abs() * u.powf(self.q[j]) + self.alpha[j].abs() * v;
        }
        freq
    }
}

impl CoupledSystem for Params12 {
    type State = State12;

    const LAYOUT: [Dispersion; 3] = State12::LAYOUT;

    fn raw(state: &State12) -> &State {
        &state.0
    }

    fn wrap(state: State) -> State12 {
        State12(state)
    }

    fn nonlinear(&self, grid: &Grid, spectra: &[Vec<Complex64>; 3], dealias: bool) -> [Vec<Complex64>; 3] {
        let u = prepare(grid, &spectra[0], dealias);
        let v1 = prepare(grid, &spectra[1], dealias);
        let v2 = prepare(grid, &spectra[2], dealias);
        let i = Complex64::new(0.0, 1.0);
        let exps = [self.p[0].plus(1), self.p[1].plus(1)];
        let mut du = Vec::with_capacity(u.len());
        let mut f1 = Vec::with_capacity(u.len());
        let mut f2 = Vec::with_capacity(u.len());
        for ((a, w1), w2) in u.iter().zip(&v1).zip(&v2) {
            let (w1, w2) = (w1.re, w2.re);
            du.push(
                i * (power_nonlinearity(*a, self.q) * self.gamma
                    + a * (self.alpha[0] * w1 + self.alpha[1] * w2)),
            );
            let m = 0.5 * a.norm_sqr();
            let g1 = self.beta[0] / exps[0].value() * signed_pow(w1, exps[0]) + self.alpha[0] * m;
            let g2 = self.beta[1] / exps[1].value() * signed_pow(w2, exps[1]) + self.alpha[1] * m;
            f1.push(Complex64::new(g1, 0.0));
            f2.push(Complex64::new(g2, 0.0));
        }
        [
            to_spectrum(grid, du, dealias),
            conservative_derivative(grid, f1, dealias),
            conservative_derivative(grid, f2, dealias),
        ]
    }

    fn nonlinear_frequency(&self, state: &State12) -> f64 {
        let k = state.grid().dealias_cutoff();
        let u = state.u().max_abs();
        let mut freq = self.gamma.abs() * u.powf(self.q);
        for j in 0..2 {
            let v = state.v(j).max_abs();
            freq += self.alpha[j].abs() * v + self.beta[j].abs() * v.powf(self.p[j].value()) * k;
        }
        freq
    }
}

fn evaluate_rhs<M: CoupledSystem>(model: &M, state: &State) -> [Field; 3] {
    let grid = state.grid();
    let spectra = [
        state.field(0).spectrum(),
        state.field(1).spectrum(),
        state.field(2).spectrum(),
    ];
    let mut out = model.nonlinear(grid, &spectra, true);
    for (idx, d) in M::LAYOUT.iter().enumerate() {
        let mut lin = spectra[idx].clone();
        grid.dealias_in_place(&mut lin);
        for (n, c) in lin.iter_mut().enumerate() {
            let k = grid.wavenumbers()[n];
            let symbol = match d {
                Dispersion::Schrodinger => Complex64::new(0.0, -k * k),
                Dispersion::Airy => {
                    let k = grid.odd_wavenumber(n);
                    Complex64::new(0.0, k * k * k)
                }
            };
            *c *= symbol;
        }
        for (o, l) in out[idx].iter_mut().zip(lin) {
            *o += l;
        }
    }
    let [a, b, c] = out;
    [
        Field::from_spectrum(grid, &a, M::LAYOUT[0].kind()),
        Field::from_spectrum(grid, &b, M::LAYOUT[1].kind()),
        Field::from_spectrum(grid, &c, M::LAYOUT[2].kind()),
    ]
}

/// Time derivative `(du1/dt, du2/dt, dv/dt)` of the (2+1) system, dealiased.
pub fn rhs21(state: &State21, params: &Params21) -> (Field, Field, Field) {
    let [a, b, c] = evaluate_rhs(params, &state.0);
    (a, b, c)
}

/// Time derivative `(du/dt, dv1/dt, dv2/dt)` of the (1+2) system, dealiased.
pub fn rhs12(state: &State12, params: &Params12) -> (Field, Field, Field) {
    let [a, b, c] = evaluate_rhs(params, &state.0);
    (a, b, c)
}
