//! Finite weighted sums of Dirac masses on the torus, and their mollification.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::{heat_factor, ScalarField};
use super::grid::TorusGrid;
use super::sobolev::{check_dimension, h_dual_distance, DualNorm, MeasureSpectrum, SobolevIndex};
use crate::error::{Error, Result};

/// Negative mass tolerated in a band-limited heat kernel before the bandwidth is rejected.
const MAX_NEGATIVE_MASS: f64 = 1e-3;

/// `Σ wⁱ δ_{xⁱ}` with `Σ wⁱ = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicMeasure {
    dim: usize,
    /// Flattened positions, `dim` entries per atom, wrapped into `[0,1)`.
    positions: Vec<f64>,
    weights: Vec<f64>,
}

impl AtomicMeasure {
    pub fn new(dim: usize, positions: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        if positions.len() != dim * weights.len() || weights.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "{} coordinates for {} atoms in dimension {dim}",
                positions.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidArgument(
                "atom weights must be finite and nonnegative".into(),
            ));
        }
        let total = compensated_sum(&weights);
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "atom weights sum to {total}, expected 1"
            )));
        }
        let positions = positions.into_iter().map(wrap_unit).collect();
        Ok(Self {
            dim,
            positions,
            weights,
        })
    }

    /// Equal weights `1/N` on the given points.
    pub fn uniform(dim: usize, positions: Vec<f64>) -> Result<Self> {
        let n = positions.len() / dim.max(1);
        let w = 1.0 / n.max(1) as f64;
        let mut weights = vec![w; n];
        // absorb rounding so that the sum is 1 to the last bit we can manage
        if let Some(last) = weights.last_mut() {
            *last = 1.0 - w * (n - 1) as f64;
        }
        Self::new(dim, positions, weights)
    }

    pub fn dirac(x: &[f64]) -> Result<Self> {
        Self::new(x.len(), x.to_vec(), vec![1.0])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    /// `∫ f dμ` for a pointwise-evaluable function.
    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .map(|(i, w)| w * f(self.position(i)))
            .sum()
    }
}

impl MeasureSpectrum for AtomicMeasure {
    fn band_coefficients(&self, grid: &TorusGrid) -> Result<Vec<Complex64>> {
        check_dimension(grid, self.dim)?;
        let m = grid.points_per_axis();
        let half = m / 2;
        let mut out = vec![Complex64::default(); grid.len()];
        match self.dim {
            1 => {
                let mut acc = vec![Complex64::default(); half];
                for (i, &w) in self.weights.iter().enumerate() {
                    let (s, c) = (-2.0 * PI * self.positions[i]).sin_cos();
                    let z = Complex64::new(c, s);
                    let mut zn = Complex64::new(w, 0.0);
                    for a in acc.iter_mut() {
                        *a += zn;
                        zn *= z;
                    }
                }
                for (n, a) in acc.iter().enumerate() {
                    out[n] = *a;
                    if n > 0 {
                        out[m - n] = a.conj();
                    }
                }
            }
            _ => {
                // n0 ∈ [0, half), n1 ∈ (-half, half); the other half follows by conjugation
                let width = 2 * half - 1;
                let mut acc = vec![Complex64::default(); half * width];
                let mut row1 = vec![Complex64::default(); width];
                for (i, &w) in self.weights.iter().enumerate() {
                    let x = &self.positions[2 * i..2 * i + 2];
                    let (s0, c0) = (-2.0 * PI * x[0]).sin_cos();
                    let (s1, c1) = (-2.0 * PI * x[1]).sin_cos();
                    let z0 = Complex64::new(c0, s0);
                    let z1 = Complex64::new(c1, s1);
                    let mid = half - 1;
                    row1[mid] = Complex64::new(1.0, 0.0);
                    for k in 1..half {
                        row1[mid + k] = row1[mid + k - 1] * z1;
                        row1[mid - k] = row1[mid + k].conj();
                    }
                    let mut p0 = Complex64::new(w, 0.0);
                    for n0 in 0..half {
                        let row = &mut acc[n0 * width..(n0 + 1) * width];
                        for (a, r) in row.iter_mut().zip(&row1) {
                            *a += p0 * r;
                        }
                        p0 *= z0;
                    }
                }
                let mid = (half - 1) as i64;
                for n0 in 0..half as i64 {
                    for j in 0..width as i64 {
                        let n1 = j - mid;
                        let c = acc[(n0 as usize) * width + j as usize];
                        if let Some(idx) = grid.spectral_index(&[n0, n1]) {
                            out[idx] = c;
                        }
                        if let Some(idx) = grid.spectral_index(&[-n0, -n1]) {
                            out[idx] = c.conj();
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    fn total_variation(&self) -> f64 {
        self.weights.iter().sum()
    }

    fn has_tail(&self) -> bool {
        true
    }
}

/// A density obtained by heat-smoothing atoms, with its distance to the atoms.
#[derive(Debug, Clone)]
pub struct Mollified {
    pub density: ScalarField,
    /// `‖μ − density‖_{H^{-k}}`.
    pub distance: DualNorm,
    /// Mass of the negative lobes of the band-limited kernel before clipping.
    pub negative_mass: f64,
}

/// Default bandwidth `4h²`.
pub fn default_bandwidth(grid: &TorusGrid) -> f64 {
    4.0 * grid.spacing().powi(2)
}

/// Applies the heat kernel at time `eps` to the band-limited spectrum of `mu`.
///
/// Small negative lobes of the truncated kernel are clipped and the result is
/// renormalized; if they exceed `1e-3` of the mass the bandwidth is rejected.
pub fn mollify_atoms(
    mu: &AtomicMeasure,
    eps: f64,
    grid: &TorusGrid,
    k: SobolevIndex,
) -> Result<Mollified> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "mollification bandwidth must be > 0, got {eps}"
        )));
    }
    let mut coeffs = mu.band_coefficients(grid)?;
    for (i, c) in coeffs.iter_mut().enumerate() {
        *c *= heat_factor(grid.wavenumber_sq(i), eps);
    }
    let raw = grid.inverse_real(&coeffs);
    let vol = grid.cell_volume();
    let negative_mass: f64 = raw.iter().filter(|v| **v < 0.0).map(|v| -v * vol).sum();
    if negative_mass > MAX_NEGATIVE_MASS {
        return Err(Error::BandwidthBelowResolution { negative_mass });
    }
    let clipped: Vec<f64> = raw.iter().map(|v| v.max(0.0)).collect();
    let mass = clipped.iter().sum::<f64>() * vol;
    let density = ScalarField::new(grid, clipped.iter().map(|v| v / mass).collect())?;
    let distance = h_dual_distance(mu, &density, grid, k)?;
    Ok(Mollified {
        density,
        distance,
        negative_mass,
    })
}

pub(crate) fn wrap_unit(x: f64) -> f64 {
    let y = x - x.floor();
    // x slightly below an integer can round up to exactly 1.0
    if y >= 1.0 {
        0.0
    } else {
        y
    }
}

/// Neumaier summation, so the unit-mass check does not drift with the atom count.
fn compensated_sum(xs: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for &x in xs {
        let t = sum + x;
        carry += if sum.abs() >= x.abs() {
            (sum - t) + x
        } else {
            (x - t) + sum
        };
        sum = t;
    }
    sum + carry
}
