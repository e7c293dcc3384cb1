//! Periodic Fourier discretization of the real line.
//!
//! A [`Grid`] covers `[-L/2, L/2)` with `N` equispaced nodes and owns the FFT
//! plans; a [`Field`] is a sampled function living on one grid. The forward
//! transform carries the `1/N` factor, so the coefficients `c_n` satisfy
//! `f(x_j) = sum_n c_n exp(i k_n (x_j + L/2))` and the discrete Plancherel
//! identity reads `sum_j |f_j|^2 dx = L sum_n |c_n|^2`.
//!
//! Spectra are stored in FFT order: index `n < N/2` carries wavenumber
//! `2 pi n / L`, index `n >= N/2` carries `2 pi (n - N) / L`. Index `N/2` is the
//! Nyquist mode; operators with an odd symbol (first derivative, Airy group,
//! translations) act on it as if its wavenumber were zero so that real
//! fields stay real.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("number of grid points must be even, got {0}")]
    OddN(usize),
    #[error("number of grid points must be at least 8, got {0}")]
    TooFewPoints(usize),
    #[error("domain length must be positive and finite, got {0}")]
    NonPositiveLength(f64),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },
}

/// Uniform periodic grid on `[-L/2, L/2)`.
pub struct Grid {
    length: f64,
    points: usize,
    wavenumbers: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("length", &self.length)
            .field("points", &self.points)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.length == other.length && self.points == other.points
    }
}

impl Grid {
    pub fn new(length: f64, points: usize) -> Result<Arc<Grid>, GridError> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(GridError::NonPositiveLength(length));
        }
        if points % 2 != 0 {
            return Err(GridError::OddN(points));
        }
        if points < 8 {
            return Err(GridError::TooFewPoints(points));
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(points);
        let inverse = planner.plan_fft_inverse(points);
        let wavenumbers = (0..points)
            .map(|n| 2.0 * PI * signed_index(n, points) as f64 / length)
            .collect();
        Ok(Arc::new(Grid {
            length,
            points,
            wavenumbers,
            forward,
            inverse,
        }))
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn dx(&self) -> f64 {
        self.length / self.points as f64
    }

    /// Node `x_j = -L/2 + j L / N`, computed as `(j - N/2) dx` so that the
    /// center node is exactly zero.
    pub fn node(&self, j: usize) -> f64 {
        (j as f64 - 0.5 * self.points as f64) * self.dx()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.points).map(|j| self.node(j)).collect()
    }

    /// Index of the node sitting at `x = 0`.
    pub fn center_index(&self) -> usize {
        self.points / 2
    }

    /// Wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// Wavenumber used by odd-symbol operators: the Nyquist mode maps to zero.
    pub fn odd_wavenumber(&self, n: usize) -> f64 {
        if self.is_nyquist(n) {
            0.0
        } else {
            self.wavenumbers[n]
        }
    }

    pub fn is_nyquist(&self, n: usize) -> bool {
        n == self.points / 2
    }

    /// Magnitude of the Nyquist wavenumber, `pi N / L`.
    pub fn k_max(&self) -> f64 {
        PI * self.points as f64 / self.length
    }

    /// Signed mode number of FFT index `n`.
    pub fn mode(&self, n: usize) -> i64 {
        signed_index(n, self.points)
    }

    /// Two-thirds rule: a mode survives dealiasing iff `3 |n| < N`.
    pub fn in_dealiased_band(&self, n: usize) -> bool {
        3 * self.mode(n).unsigned_abs() < self.points as u64
    }

    /// Largest wavenumber kept by the two-thirds rule.
    pub fn dealias_cutoff(&self) -> f64 {
        let nmax = (self.points - 1) / 3;
        2.0 * PI * nmax as f64 / self.length
    }

    /// In-place forward transform, scaled by `1/N`.
    pub fn forward_in_place(&self, data: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.points);
        self.forward.process(data);
        let scale = 1.0 / self.points as f64;
        for c in data.iter_mut() {
            *c *= scale;
        }
    }

    /// In-place inverse transform (no scaling).
    pub fn inverse_in_place(&self, data: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.points);
        self.inverse.process(data);
    }

    pub fn to_spectral(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut data = values.to_vec();
        self.forward_in_place(&mut data);
        data
    }

    pub fn to_physical(&self, spectrum: &[Complex64]) -> Vec<Complex64> {
        let mut data = spectrum.to_vec();
        self.inverse_in_place(&mut data);
        data
    }

    pub fn dealias_in_place(&self, spectrum: &mut [Complex64]) {
        for (n, c) in spectrum.iter_mut().enumerate() {
            if !self.in_dealiased_band(n) {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// `L * sum_n w(k_n) |c_n|^2` for a spectral weight `w`.
    pub fn weighted_norm2(&self, spectrum: &[Complex64], weight: impl Fn(usize) -> f64) -> f64 {
        self.length
            * spectrum
                .iter()
                .enumerate()
                .map(|(n, c)| weight(n) * c.norm_sqr())
                .sum::<f64>()
    }
}

fn signed_index(n: usize, points: usize) -> i64 {
    if n < points / 2 {
        n as i64
    } else {
        n as i64 - points as i64
    }
}

/// Convenience wrapper matching the free-function style used elsewhere.
pub fn make_grid(length: f64, points: usize) -> Result<Arc<Grid>, GridError> {
    Grid::new(length, points)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldKind {
    Real,
    Complex,
}

/// Samples of a function on a [`Grid`].
///
/// Real fields keep their imaginary parts identically zero; every operation
/// that preserves realness re-projects onto the real axis.
#[derive(Clone, PartialEq)]
pub struct Field {
    grid: Arc<Grid>,
    values: Vec<Complex64>,
    kind: FieldKind,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("grid", &self.grid)
            .field("kind", &self.kind)
            .field("max_abs", &self.max_abs())
            .finish()
    }
}

impl Field {
    pub fn zeros(grid: &Arc<Grid>, kind: FieldKind) -> Field {
        Field {
            grid: grid.clone(),
            values: vec![Complex64::new(0.0, 0.0); grid.points()],
            kind,
        }
    }

    pub fn from_values(
        grid: &Arc<Grid>,
        values: Vec<Complex64>,
        kind: FieldKind,
    ) -> Result<Field, GridError> {
        if values.len() != grid.points() {
            return Err(GridError::LengthMismatch {
                expected: grid.points(),
                got: values.len(),
            });
        }
        let mut field = Field {
            grid: grid.clone(),
            values,
            kind,
        };
        field.enforce_kind();
        Ok(field)
    }

    pub fn from_real(grid: &Arc<Grid>, values: &[f64]) -> Result<Field, GridError> {
        Field::from_values(
            grid,
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            FieldKind::Real,
        )
    }

    pub fn from_real_fn(grid: &Arc<Grid>, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: grid.clone(),
            values: grid.nodes().into_iter().map(|x| Complex64::new(f(x), 0.0)).collect(),
            kind: FieldKind::Real,
        }
    }

    pub fn from_complex_fn(grid: &Arc<Grid>, f: impl Fn(f64) -> Complex64) -> Field {
        Field {
            grid: grid.clone(),
            values: grid.nodes().into_iter().map(f).collect(),
            kind: FieldKind::Complex,
        }
    }

    /// Builds a field from coefficients in FFT order (see module docs).
    pub fn from_spectrum(grid: &Arc<Grid>, spectrum: &[Complex64], kind: FieldKind) -> Field {
        let mut field = Field {
            grid: grid.clone(),
            values: grid.to_physical(spectrum),
            kind,
        };
        field.enforce_kind();
        field
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|c| c.re).collect()
    }

    /// Reinterprets the samples as a complex-valued field.
    pub fn as_complex(&self) -> Field {
        Field {
            kind: FieldKind::Complex,
            ..self.clone()
        }
    }

    /// Real part as a real-valued field.
    pub fn real_part(&self) -> Field {
        let mut out = self.clone();
        out.kind = FieldKind::Real;
        out.enforce_kind();
        out
    }

    pub fn spectrum(&self) -> Vec<Complex64> {
        self.grid.to_spectral(&self.values)
    }

    pub fn same_grid(&self, other: &Field) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    fn enforce_kind(&mut self) {
        if self.kind == FieldKind::Real {
            for c in self.values.iter_mut() {
                c.im = 0.0;
            }
        }
    }

    fn with_spectral_multiplier(&self, multiplier: impl Fn(usize) -> Complex64) -> Field {
        let mut spectrum = self.spectrum();
        for (n, c) in spectrum.iter_mut().enumerate() {
            *c *= multiplier(n);
        }
        Field::from_spectrum(&self.grid, &spectrum, self.kind)
    }

    /// Spectral derivative of the given order, `(ik)^order` in Fourier space.
    pub fn derivative(&self, order: u32) -> Field {
        let grid = &self.grid;
        self.with_spectral_multiplier(|n| {
            let k = if order % 2 == 1 {
                grid.odd_wavenumber(n)
            } else {
                grid.wavenumbers()[n]
            };
            Complex64::new(0.0, k).powu(order)
        })
    }

    /// Free Schrödinger group `exp(i t d^2/dx^2)`, symbol `exp(-i k^2 t)`.
    pub fn apply_schrodinger_group(&self, t: f64) -> Field {
        if t == 0.0 {
            return self.clone();
        }
        let grid = &self.grid;
        self.with_spectral_multiplier(|n| schrodinger_symbol(grid.wavenumbers()[n], t))
    }

    /// Airy group `exp(-t d^3/dx^3)`, symbol `exp(i k^3 t)`.
    pub fn apply_airy_group(&self, t: f64) -> Field {
        if t == 0.0 {
            return self.clone();
        }
        let grid = &self.grid;
        self.with_spectral_multiplier(|n| airy_symbol(grid.odd_wavenumber(n), t))
    }

    /// Translation `(T_a f)(x) = f(x + a)`, exact for band-limited data.
    pub fn translate(&self, a: f64) -> Field {
        if a == 0.0 {
            return self.clone();
        }
        let grid = &self.grid;
        self.with_spectral_multiplier(|n| Complex64::from_polar(1.0, grid.odd_wavenumber(n) * a))
    }

    /// Circular shift by whole grid cells: `out[j] = self[j + shift]`.
    pub fn roll(&self, shift: isize) -> Field {
        let n = self.values.len() as isize;
        let values = (0..n)
            .map(|j| self.values[(j + shift).rem_euclid(n) as usize])
            .collect();
        Field {
            grid: self.grid.clone(),
            values,
            kind: self.kind,
        }
    }

    pub fn dealias(&self) -> Field {
        let mut spectrum = self.spectrum();
        self.grid.dealias_in_place(&mut spectrum);
        Field::from_spectrum(&self.grid, &spectrum, self.kind)
    }

    /// `||f||_{L^2}^2`.
    pub fn l2_norm2(&self) -> f64 {
        self.grid.dx() * self.values.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm2().sqrt()
    }

    /// `||f'||_{L^2}^2`, computed spectrally.
    pub fn derivative_norm2(&self) -> f64 {
        let k = self.grid.wavenumbers();
        self.grid.weighted_norm2(&self.spectrum(), |n| k[n] * k[n])
    }

    /// `||f||_{H^1}^2 = sum (1 + k^2) |f_hat|^2`.
    pub fn h1_norm2(&self) -> f64 {
        let k = self.grid.wavenumbers();
        self.grid.weighted_norm2(&self.spectrum(), |n| 1.0 + k[n] * k[n])
    }

    pub fn h1_norm(&self) -> f64 {
        self.h1_norm2().sqrt()
    }

    /// `<self, other>_{L^2} = int conj(self) other dx`.
    pub fn inner(&self, other: &Field) -> Complex64 {
        debug_assert!(self.same_grid(other));
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * self.grid.dx()
    }

    /// `<self, other>_{H^1}`.
    pub fn inner_h1(&self, other: &Field) -> Complex64 {
        debug_assert!(self.same_grid(other));
        let k = self.grid.wavenumbers();
        let a = self.spectrum();
        let b = other.spectrum();
        a.iter()
            .zip(&b)
            .enumerate()
            .map(|(n, (x, y))| x.conj() * y * (1.0 + k[n] * k[n]))
            .sum::<Complex64>()
            * self.grid.length()
    }

    /// Pointwise map; the result kind is `kind`.
    pub fn map(&self, kind: FieldKind, f: impl Fn(Complex64) -> Complex64) -> Field {
        let mut out = Field {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&c| f(c)).collect(),
            kind,
        };
        out.enforce_kind();
        out
    }

    /// Pointwise map using the node coordinate.
    pub fn map_with_x(&self, kind: FieldKind, f: impl Fn(f64, Complex64) -> Complex64) -> Field {
        let grid = &self.grid;
        let mut out = Field {
            grid: grid.clone(),
            values: self
                .values
                .iter()
                .enumerate()
                .map(|(j, &c)| f(grid.node(j), c))
                .collect(),
            kind,
        };
        out.enforce_kind();
        out
    }

    pub fn scale(&self, a: f64) -> Field {
        self.map(self.kind, |c| c * a)
    }

    pub fn scale_complex(&self, a: Complex64) -> Field {
        self.map(FieldKind::Complex, |c| c * a)
    }

    /// `self + a * other`, keeping the kind of `self`.
    pub fn axpy(&self, a: f64, other: &Field) -> Field {
        debug_assert!(self.same_grid(other));
        let mut out = Field {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| x + y * a)
                .collect(),
            kind: self.kind,
        };
        out.enforce_kind();
        out
    }

    pub fn add(&self, other: &Field) -> Field {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &Field) -> Field {
        self.axpy(-1.0, other)
    }
}

pub fn schrodinger_symbol(k: f64, t: f64) -> Complex64 {
    Complex64::from_polar(1.0, -k * k * t)
}

pub fn airy_symbol(k: f64, t: f64) -> Complex64 {
    Complex64::from_polar(1.0, k * k * k * t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_band_limited(grid: &Arc<Grid>, kind: FieldKind, seed: u64, band: i64) -> Field {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut spectrum = vec![Complex64::new(0.0, 0.0); grid.points()];
        for n in 0..grid.points() {
            if grid.mode(n).abs() <= band {
                spectrum[n] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        let field = Field::from_spectrum(grid, &spectrum, FieldKind::Complex);
        match kind {
            FieldKind::Complex => field,
            FieldKind::Real => field.real_part(),
        }
    }

    fn max_diff(a: &Field, b: &Field) -> f64 {
        a.values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn grid_wavenumbers_for_unit_period() {
        let grid = make_grid(2.0 * PI, 8).unwrap();
        let mut k: Vec<f64> = grid.wavenumbers().to_vec();
        k.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expected = [-4.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0];
        for (a, b) in k.iter().zip(expected) {
            assert_relative_eq!(*a, b, epsilon = 1e-14);
        }
        assert_eq!(grid.mode(4), -4);
    }

    #[test]
    fn grid_spacing() {
        let grid = make_grid(80.0, 512).unwrap();
        assert_eq!(grid.dx(), 0.15625);
        assert_eq!(grid.node(256), 0.0);
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert_eq!(make_grid(1.0, 7).unwrap_err(), GridError::OddN(7));
        assert_eq!(make_grid(1.0, 6).unwrap_err(), GridError::TooFewPoints(6));
        assert!(matches!(make_grid(0.0, 16), Err(GridError::NonPositiveLength(_))));
        assert!(matches!(make_grid(-2.0, 16), Err(GridError::NonPositiveLength(_))));
    }

    #[test]
    fn derivative_of_sine() {
        let grid = make_grid(2.0 * PI, 32).unwrap();
        let f = Field::from_real_fn(&grid, f64::sin);
        let df = f.derivative(1);
        let exact = Field::from_real_fn(&grid, f64::cos);
        assert!(max_diff(&df, &exact) <= 1e-12);
        assert_eq!(df.kind(), FieldKind::Real);
    }

    #[test]
    fn second_derivative_of_plane_wave() {
        let grid = make_grid(2.0 * PI, 32).unwrap();
        let f = Field::from_complex_fn(&grid, |x| Complex64::from_polar(1.0, 3.0 * x));
        let d2 = f.derivative(2);
        let exact = f.scale(-9.0);
        assert!(max_diff(&d2, &exact) <= 1e-12);
    }

    #[test]
    fn third_derivative_matches_composition() {
        let grid = make_grid(20.0, 64).unwrap();
        let f = random_band_limited(&grid, FieldKind::Real, 3, 20);
        let direct = f.derivative(3);
        let composed = f.derivative(1).derivative(1).derivative(1);
        let scale = direct.max_abs();
        assert!(max_diff(&direct, &composed) <= 1e-10 * scale);
    }

    #[test]
    fn schrodinger_plane_wave_phase() {
        let grid = make_grid(2.0 * PI, 16).unwrap();
        let t = 0.37;
        let f = Field::from_complex_fn(&grid, |x| Complex64::from_polar(1.0, 2.0 * x));
        let out = f.apply_schrodinger_group(t);
        let exact = f.scale_complex(Complex64::from_polar(1.0, -4.0 * t));
        assert!(max_diff(&out, &exact) <= 1e-13);
        let same = f.apply_schrodinger_group(0.0);
        assert_eq!(same.values(), f.values());
    }

    #[test]
    fn schrodinger_gaussian_matches_multiplier_formula() {
        // Independent route: explicit DFT sums instead of the FFT plan.
        let grid = make_grid(20.0, 64).unwrap();
        let t = 0.5;
        let f = Field::from_complex_fn(&grid, |x| Complex64::new((-x * x).exp(), 0.0));
        let out = f.apply_schrodinger_group(t);
        let n = grid.points();
        let nodes = grid.nodes();
        let mut coeffs = Vec::with_capacity(n);
        for m in 0..n {
            let k = 2.0 * PI * grid.mode(m) as f64 / grid.length();
            let c: Complex64 = nodes
                .iter()
                .zip(f.values())
                .map(|(&x, v)| v * Complex64::from_polar(1.0, -k * x))
                .sum::<Complex64>()
                / n as f64;
            coeffs.push((k, c * Complex64::from_polar(1.0, -k * k * t)));
        }
        for (j, &x) in nodes.iter().enumerate() {
            let value: Complex64 = coeffs
                .iter()
                .map(|&(k, c)| c * Complex64::from_polar(1.0, k * x))
                .sum();
            assert!((value - out.values()[j]).norm() <= 1e-12);
        }
    }

    #[test]
    fn airy_single_mode_half_period() {
        let grid = make_grid(2.0 * PI, 16).unwrap();
        let f = Field::from_real_fn(&grid, f64::cos);
        let out = f.apply_airy_group(PI);
        let exact = f.scale(-1.0);
        assert!(max_diff(&out, &exact) <= 1e-13);
        assert_eq!(out.kind(), FieldKind::Real);
    }

    #[test]
    fn airy_preserves_sech_mass() {
        let grid = make_grid(40.0, 256).unwrap();
        let f = Field::from_real_fn(&grid, |x| 1.0 / x.cosh().powi(2));
        let out = f.apply_airy_group(1.0);
        assert!((out.l2_norm2() - f.l2_norm2()).abs() <= 1e-12 * f.l2_norm2());
        assert_eq!(f.apply_airy_group(0.0).values(), f.values());
    }

    #[test]
    fn norms_of_sine() {
        let grid = make_grid(2.0 * PI, 32).unwrap();
        let f = Field::from_real_fn(&grid, f64::sin);
        // Oracle: trapezoid quadrature of sin^2 and cos^2 on one period.
        let n = 4000;
        let h = 2.0 * PI / n as f64;
        let int_sin2: f64 = (0..n).map(|j| (j as f64 * h).sin().powi(2)).sum::<f64>() * h;
        let int_cos2: f64 = (0..n).map(|j| (j as f64 * h).cos().powi(2)).sum::<f64>() * h;
        assert_relative_eq!(f.l2_norm2(), int_sin2, epsilon = 1e-12);
        assert_relative_eq!(f.h1_norm2(), int_sin2 + int_cos2, epsilon = 1e-12);
        let zero = Field::zeros(&grid, FieldKind::Complex);
        assert_eq!(zero.l2_norm2(), 0.0);
        assert_eq!(zero.h1_norm(), 0.0);
    }

    #[test]
    fn dealias_behaviour() {
        let grid = make_grid(2.0 * PI, 32).unwrap();
        let kept = Field::from_complex_fn(&grid, |x| {
            Complex64::from_polar(1.0, 4.0 * x) + Complex64::new(0.5 * (2.0 * x).cos(), 0.0)
        });
        assert!(max_diff(&kept.dealias(), &kept) <= 1e-13);
        let nyquist = Field::from_complex_fn(&grid, |x| Complex64::from_polar(1.0, 16.0 * x));
        assert!(nyquist.dealias().max_abs() <= 1e-13);
    }

    #[test]
    fn dealiased_product_matches_fine_grid_product() {
        let n = 48;
        let grid = make_grid(2.0 * PI, n).unwrap();
        let fine = make_grid(2.0 * PI, 2 * n).unwrap();
        let band = (n as i64 - 1) / 3;
        let a = random_band_limited(&grid, FieldKind::Complex, 11, band);
        let b = random_band_limited(&grid, FieldKind::Complex, 12, band);
        let product = Field::from_values(
            &grid,
            a.values().iter().zip(b.values()).map(|(x, y)| x * y).collect(),
            FieldKind::Complex,
        )
        .unwrap()
        .dealias();

        // Fine-grid oracle: zero-pad both factors, multiply exactly, truncate.
        let pad = |f: &Field| {
            let spec = f.spectrum();
            let mut out = vec![Complex64::new(0.0, 0.0); 2 * n];
            for m in 0..n {
                let mode = grid.mode(m);
                let idx = if mode >= 0 { mode as usize } else { (2 * n as i64 + mode) as usize };
                out[idx] = spec[m];
            }
            Field::from_spectrum(&fine, &out, FieldKind::Complex)
        };
        let (fa, fb) = (pad(&a), pad(&b));
        let fine_product: Vec<Complex64> =
            fa.values().iter().zip(fb.values()).map(|(x, y)| x * y).collect();
        let fine_spec = fine.to_spectral(&fine_product);
        let mut truncated = vec![Complex64::new(0.0, 0.0); n];
        for m in 0..n {
            if grid.in_dealiased_band(m) {
                let mode = grid.mode(m);
                let idx = if mode >= 0 { mode as usize } else { (2 * n as i64 + mode) as usize };
                truncated[m] = fine_spec[idx];
            }
        }
        let expected = Field::from_spectrum(&grid, &truncated, FieldKind::Complex);
        assert!(max_diff(&product, &expected) <= 1e-10);
    }

    #[test]
    fn translation_preserves_norms() {
        let grid = make_grid(30.0, 128).unwrap();
        let f = random_band_limited(&grid, FieldKind::Complex, 5, 20);
        let g = f.translate(1.234);
        assert_relative_eq!(g.l2_norm2(), f.l2_norm2(), max_relative = 1e-12);
        assert_relative_eq!(g.h1_norm2(), f.h1_norm2(), max_relative = 1e-12);
    }

    #[test]
    fn translation_matches_shifted_samples() {
        let grid = make_grid(40.0, 256).unwrap();
        let f = Field::from_real_fn(&grid, |x| (-(x - 1.0) * (x - 1.0)).exp());
        let g = f.translate(0.75);
        let exact = Field::from_real_fn(&grid, |x| (-(x + 0.75 - 1.0) * (x + 0.75 - 1.0)).exp());
        assert!(max_diff(&g, &exact) <= 1e-12);
        let rolled = f.roll(4);
        assert!(max_diff(&rolled, &f.translate(4.0 * grid.dx())) <= 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn plancherel_holds(seed in 0u64..10_000) {
            let grid = make_grid(17.0, 64).unwrap();
            let f = random_band_limited(&grid, FieldKind::Complex, seed, 32);
            let spectral = grid.weighted_norm2(&f.spectrum(), |_| 1.0);
            prop_assert!((spectral - f.l2_norm2()).abs() <= 1e-12 * f.l2_norm2());
        }

        #[test]
        fn groups_are_unitary_and_compose(seed in 0u64..10_000, t1 in -2.0f64..2.0, t2 in -2.0f64..2.0) {
            let grid = make_grid(25.0, 64).unwrap();
            let f = random_band_limited(&grid, FieldKind::Complex, seed, 32);
            let v = random_band_limited(&grid, FieldKind::Real, seed + 1, 32);
            let norm = f.l2_norm();
            prop_assert!((f.apply_schrodinger_group(t1).l2_norm() - norm).abs() <= 1e-12 * norm);
            prop_assert!((v.apply_airy_group(t1).l2_norm() - v.l2_norm()).abs() <= 1e-12 * v.l2_norm());

            let composed = f.apply_schrodinger_group(t1).apply_schrodinger_group(t2);
            let direct = f.apply_schrodinger_group(t1 + t2);
            prop_assert!(max_diff(&composed, &direct) <= 1e-12 * f.max_abs().max(1.0) * 10.0);
            let back = f.apply_schrodinger_group(t1).apply_schrodinger_group(-t1);
            prop_assert!(max_diff(&back, &f) <= 1e-12 * f.max_abs().max(1.0) * 10.0);

            let composed = v.apply_airy_group(t1).apply_airy_group(t2);
            let direct = v.apply_airy_group(t1 + t2);
            prop_assert!(max_diff(&composed, &direct) <= 1e-12 * v.max_abs().max(1.0) * 10.0);
        }

        #[test]
        fn first_derivative_is_skew_adjoint(seed in 0u64..10_000) {
            let grid = make_grid(12.0, 64).unwrap();
            let f = random_band_limited(&grid, FieldKind::Real, seed, 32);
            let g = random_band_limited(&grid, FieldKind::Real, seed + 7, 32);
            let lhs = f.derivative(1).inner(&g).re + f.inner(&g.derivative(1)).re;
            prop_assert!(lhs.abs() <= 1e-10 * f.l2_norm() * g.l2_norm());
        }
    }
}
