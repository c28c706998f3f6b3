//! Real scalar fields on a [`TorusGrid`] and their Fourier-multiplier calculus.

use std::f64::consts::PI;
use std::fmt;
use std::sync::OnceLock;

use num_complex::Complex64;

use super::grid::TorusGrid;
use crate::error::{Error, Result};

/// Node values of a real function on the torus, with lazily cached coefficients.
pub struct ScalarField {
    grid: TorusGrid,
    values: Vec<f64>,
    spectrum: OnceLock<Vec<Complex64>>,
}

impl Clone for ScalarField {
    fn clone(&self) -> Self {
        let spectrum = OnceLock::new();
        if let Some(s) = self.spectrum.get() {
            let _ = spectrum.set(s.clone());
        }
        Self {
            grid: self.grid.clone(),
            values: self.values.clone(),
            spectrum,
        }
    }
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("grid", &self.grid)
            .field("min", &self.min())
            .field("max", &self.max())
            .finish()
    }
}

impl PartialEq for ScalarField {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.values == other.values
    }
}

impl ScalarField {
    pub fn new(grid: &TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self::from_values(grid, values))
    }

    pub(crate) fn from_values(grid: &TorusGrid, values: Vec<f64>) -> Self {
        Self {
            grid: grid.clone(),
            values,
            spectrum: OnceLock::new(),
        }
    }

    pub fn from_fn(grid: &TorusGrid, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.node(i))).collect();
        Self::from_values(grid, values)
    }

    pub fn constant(grid: &TorusGrid, c: f64) -> Self {
        Self::from_values(grid, vec![c; grid.len()])
    }

    pub fn zeros(grid: &TorusGrid) -> Self {
        Self::constant(grid, 0.0)
    }

    /// Inverse of [`ScalarField::spectrum`]; the imaginary part of the synthesis is dropped.
    pub fn from_spectrum(grid: &TorusGrid, coeffs: &[Complex64]) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} coefficients for a grid of {} nodes",
                coeffs.len(),
                grid.len()
            )));
        }
        let values = grid.inverse_real(coeffs);
        let field = Self::from_values(grid, values);
        Ok(field)
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Fourier coefficients in FFT order (normalized, see [`TorusGrid`]).
    pub fn spectrum(&self) -> &[Complex64] {
        self.spectrum
            .get_or_init(|| self.grid.forward_real(&self.values))
    }

    /// `∫ f dx` over the unit torus (exact for band-limited integrands).
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// `∫ f g dx`.
    pub fn inner(&self, other: &ScalarField) -> f64 {
        debug_assert_eq!(self.grid, other.grid);
        dot(&self.values, &other.values) / self.values.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        Self::from_values(&self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> ScalarField {
        debug_assert_eq!(self.grid, other.grid);
        Self::from_values(
            &self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn sub(&self, other: &ScalarField) -> ScalarField {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &ScalarField) -> ScalarField {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn scale(&self, s: f64) -> ScalarField {
        self.map(|v| v * s)
    }

    /// Applies a Fourier multiplier `c_n ↦ mult(idx) c_n`.
    pub fn apply_multiplier(&self, mult: impl Fn(usize) -> Complex64) -> ScalarField {
        let coeffs: Vec<Complex64> = self
            .spectrum()
            .iter()
            .enumerate()
            .map(|(i, &c)| c * mult(i))
            .collect();
        Self::from_values(&self.grid, self.grid.inverse_real(&coeffs))
    }

    /// Spectral partial derivative along `axis`.
    pub fn partial(&self, axis: usize) -> ScalarField {
        let grid = self.grid.clone();
        self.apply_multiplier(|i| grid.derivative_multiplier(i, axis))
    }

    /// One field per axis, multiplier `2πi n_i`.
    pub fn gradient(&self) -> Vec<ScalarField> {
        (0..self.grid.dim())
            .map(|axis| self.partial(axis))
            .collect()
    }

    /// Multiplier `-(2π)²|n|²`, with the Nyquist index treated like the first derivative (zero).
    pub fn laplacian(&self) -> ScalarField {
        let grid = self.grid.clone();
        self.apply_multiplier(|i| {
            let mut s = Complex64::new(0.0, 0.0);
            for axis in 0..grid.dim() {
                let k = grid.derivative_multiplier(i, axis);
                s += k * k;
            }
            s
        })
    }

    /// Heat semigroup `P_t` with generator `½Δ`: multiplier `exp(-½(2π)²|n|² t)`.
    pub fn heat_propagate(&self, t: f64) -> Result<ScalarField> {
        if !(t >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "heat propagation time must be >= 0, got {t}"
            )));
        }
        if t == 0.0 {
            return Ok(self.clone());
        }
        let grid = self.grid.clone();
        Ok(self.apply_multiplier(|i| Complex64::new(heat_factor(grid.wavenumber_sq(i), t), 0.0)))
    }

    /// Band-limited interpolant for evaluation off the grid.
    pub fn evaluator(&self) -> BandLimited {
        BandLimited::new(&self.grid, self.spectrum())
    }
}

/// Divergence of a vector field given per axis.
pub fn divergence(components: &[ScalarField]) -> Result<ScalarField> {
    let first = components
        .first()
        .ok_or_else(|| Error::InvalidArgument("divergence of an empty vector field".into()))?;
    let grid = first.grid().clone();
    if components.len() != grid.dim() {
        return Err(Error::InvalidArgument(format!(
            "{} components on a {}-dimensional grid",
            components.len(),
            grid.dim()
        )));
    }
    let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (axis, comp) in components.iter().enumerate() {
        grid.check_same(comp.grid())?;
        for (i, (a, c)) in acc.iter_mut().zip(comp.spectrum()).enumerate() {
            *a += grid.derivative_multiplier(i, axis) * c;
        }
    }
    ScalarField::from_spectrum(&grid, &acc)
}

pub(crate) fn heat_factor(wavenumber_sq: f64, t: f64) -> f64 {
    (-0.5 * (2.0 * PI).powi(2) * wavenumber_sq * t).exp()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Trigonometric interpolant restricted to the resolved band `|n_i| < M/2`.
///
/// Modes with negligible amplitude are dropped so that evaluation cost scales
/// with the field's effective bandwidth.
#[derive(Debug, Clone)]
pub struct BandLimited {
    dim: usize,
    mean: f64,
    /// Modes in the upper half-space (excluding zero); evaluation doubles their real part.
    modes: Vec<([i64; 2], Complex64)>,
    max_n: [i64; 2],
}

const MODE_CUTOFF: f64 = 1e-15;

impl BandLimited {
    fn new(grid: &TorusGrid, spectrum: &[Complex64]) -> Self {
        let dim = grid.dim();
        let scale = spectrum.iter().fold(0.0_f64, |acc, c| acc.max(c.norm()));
        let mut modes = Vec::new();
        let mut max_n = [0i64; 2];
        for (idx, &c) in spectrum.iter().enumerate() {
            if !grid.in_band(idx) || c.norm() <= MODE_CUTOFF * scale {
                continue;
            }
            let n = grid.wavevector(idx);
            let key = if dim == 1 { [n[0], 0] } else { [n[0], n[1]] };
            let upper = key[0] > 0 || (key[0] == 0 && key[1] > 0);
            if !upper {
                continue;
            }
            max_n[0] = max_n[0].max(key[0].abs());
            max_n[1] = max_n[1].max(key[1].abs());
            modes.push((key, c));
        }
        Self {
            dim,
            mean: spectrum[0].re,
            modes,
            max_n,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of retained non-constant modes.
    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self.dim {
            1 => self.eval_1d(x[0]),
            _ => self.eval_2d(x[0], x[1]),
        }
    }

    fn eval_1d(&self, x: f64) -> f64 {
        if self.modes.is_empty() {
            return self.mean;
        }
        let (s, c) = (2.0 * PI * x).sin_cos();
        let z = Complex64::new(c, s);
        let mut zn = Complex64::new(1.0, 0.0);
        let mut next = 1i64;
        let mut acc = 0.0;
        for &(n, coef) in &self.modes {
            while next <= n[0] {
                zn *= z;
                next += 1;
            }
            acc += (coef * zn).re;
        }
        self.mean + 2.0 * acc
    }

    fn eval_2d(&self, x0: f64, x1: f64) -> f64 {
        if self.modes.is_empty() {
            return self.mean;
        }
        let p0 = powers(x0, self.max_n[0]);
        let p1 = powers(x1, self.max_n[1]);
        let off = self.max_n[1];
        let mut acc = 0.0;
        for &(n, coef) in &self.modes {
            let z0 = p0[(n[0] + self.max_n[0]) as usize];
            let z1 = p1[(n[1] + off) as usize];
            acc += (coef * z0 * z1).re;
        }
        self.mean + 2.0 * acc
    }
}

/// `e^{2πi n x}` for `n ∈ [-max, max]`.
fn powers(x: f64, max: i64) -> Vec<Complex64> {
    let (s, c) = (2.0 * PI * x).sin_cos();
    let z = Complex64::new(c, s);
    let mut out = vec![Complex64::new(1.0, 0.0); (2 * max + 1) as usize];
    let mid = max as usize;
    for k in 1..=mid {
        out[mid + k] = out[mid + k - 1] * z;
        out[mid - k] = out[mid + k].conj();
    }
    out
}
