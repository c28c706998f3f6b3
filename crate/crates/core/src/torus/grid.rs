//! Uniform periodic grids on the unit torus and the FFT plumbing behind them.
//!
//! Coefficients follow the convention `f(x) = Σ_n f̂_n e^{2πi n·x}` with
//! `f̂_n = M^{-d} Σ_m f(x_m) e^{-2πi n·x_m}`, stored in FFT order along each
//! axis. Grid nodes are flattened row-major, axis 0 slowest.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

struct GridInner {
    dim: usize,
    m: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Signed wavenumber per flat index and axis (`dim` entries per node).
    wavenumbers: Vec<i64>,
    /// True where some axis sits on the Nyquist index `-M/2`.
    nyquist: Vec<bool>,
}

/// A uniform grid of `M^d` nodes on `[0,1)^d`, `d ∈ {1, 2}`.
///
/// Cloning is cheap; clones share FFT plans.
#[derive(Clone)]
pub struct TorusGrid {
    inner: Arc<GridInner>,
}

impl fmt::Debug for TorusGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorusGrid")
            .field("dim", &self.inner.dim)
            .field("points_per_axis", &self.inner.m)
            .finish()
    }
}

impl PartialEq for TorusGrid {
    fn eq(&self, other: &Self) -> bool {
        self.inner.dim == other.inner.dim && self.inner.m == other.inner.m
    }
}

impl Eq for TorusGrid {}

impl TorusGrid {
    /// `points_per_axis` must be a power of two, at least 8.
    pub fn new(dim: usize, points_per_axis: usize) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        let m = points_per_axis;
        if m < 8 || !m.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "points per axis must be a power of two >= 8, got {m}"
            )));
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(m);
        let inverse = planner.plan_fft_inverse(m);
        let len = m.pow(dim as u32);
        let mut wavenumbers = Vec::with_capacity(len * dim);
        let mut nyquist = Vec::with_capacity(len);
        for idx in 0..len {
            let mut on_nyquist = false;
            for axis in 0..dim {
                let i = axis_index(idx, axis, dim, m);
                let n = signed_wavenumber(i, m);
                on_nyquist |= i == m / 2;
                wavenumbers.push(n);
            }
            nyquist.push(on_nyquist);
        }
        Ok(Self {
            inner: Arc::new(GridInner {
                dim,
                m,
                forward,
                inverse,
                wavenumbers,
                nyquist,
            }),
        })
    }

    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.inner.m
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.inner.m as f64
    }

    /// Total number of nodes, `M^d`.
    pub fn len(&self) -> usize {
        self.inner.m.pow(self.inner.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Volume of one cell, `h^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.inner.dim as i32)
    }

    /// Coordinates of node `idx`.
    pub fn node(&self, idx: usize) -> Vec<f64> {
        let h = self.spacing();
        (0..self.inner.dim)
            .map(|axis| axis_index(idx, axis, self.inner.dim, self.inner.m) as f64 * h)
            .collect()
    }

    /// Coordinate of node `idx` along `axis`.
    pub fn coordinate(&self, idx: usize, axis: usize) -> f64 {
        axis_index(idx, axis, self.inner.dim, self.inner.m) as f64 * self.spacing()
    }

    /// Signed wavenumber of spectral index `idx` along `axis`, in `[-M/2, M/2)`.
    pub fn wavenumber(&self, idx: usize, axis: usize) -> i64 {
        self.inner.wavenumbers[idx * self.inner.dim + axis]
    }

    /// The full wavevector of spectral index `idx`.
    pub fn wavevector(&self, idx: usize) -> &[i64] {
        let d = self.inner.dim;
        &self.inner.wavenumbers[idx * d..(idx + 1) * d]
    }

    /// `|n|²` for spectral index `idx`.
    pub fn wavenumber_sq(&self, idx: usize) -> f64 {
        self.wavevector(idx).iter().map(|&n| (n * n) as f64).sum()
    }

    /// Whether spectral index `idx` lies inside the resolved band `|n_i| < M/2`.
    pub fn in_band(&self, idx: usize) -> bool {
        !self.inner.nyquist[idx]
    }

    /// Flat index of the spectral entry with wavevector `n` (entries in `(-M/2, M/2)`).
    pub fn spectral_index(&self, n: &[i64]) -> Option<usize> {
        let m = self.inner.m as i64;
        if n.len() != self.inner.dim || n.iter().any(|&k| k.abs() >= m / 2) {
            return None;
        }
        Some(n.iter().fold(0usize, |acc, &k| {
            acc * self.inner.m + k.rem_euclid(m) as usize
        }))
    }

    /// Forward transform of real node values, normalized by `M^d`.
    pub fn forward_real(&self, values: &[f64]) -> Vec<Complex64> {
        debug_assert_eq!(values.len(), self.len());
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut buf, false);
        let scale = 1.0 / self.len() as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
        buf
    }

    /// Inverse transform keeping the real part.
    pub fn inverse_real(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let mut buf = coeffs.to_vec();
        self.transform(&mut buf, true);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// Unnormalized in-place transform over all axes.
    pub(crate) fn transform(&self, buf: &mut [Complex64], inverse: bool) {
        let m = self.inner.m;
        let fft = if inverse {
            &self.inner.inverse
        } else {
            &self.inner.forward
        };
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        match self.inner.dim {
            1 => fft.process_with_scratch(buf, &mut scratch),
            _ => {
                // rows are contiguous along axis 1
                for row in buf.chunks_exact_mut(m) {
                    fft.process_with_scratch(row, &mut scratch);
                }
                let mut column = vec![Complex64::default(); m];
                for j in 0..m {
                    for (i, c) in column.iter_mut().enumerate() {
                        *c = buf[i * m + j];
                    }
                    fft.process_with_scratch(&mut column, &mut scratch);
                    for (i, c) in column.iter().enumerate() {
                        buf[i * m + j] = *c;
                    }
                }
            }
        }
    }

    /// Multiplier `2πi n_axis` for first derivatives, zero on the Nyquist index.
    pub fn derivative_multiplier(&self, idx: usize, axis: usize) -> Complex64 {
        let i = axis_index(idx, axis, self.inner.dim, self.inner.m);
        if i == self.inner.m / 2 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, 2.0 * PI * self.wavenumber(idx, axis) as f64)
        }
    }

    pub(crate) fn check_same(&self, other: &TorusGrid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

fn axis_index(idx: usize, axis: usize, dim: usize, m: usize) -> usize {
    let stride = m.pow((dim - 1 - axis) as u32);
    (idx / stride) % m
}

fn signed_wavenumber(i: usize, m: usize) -> i64 {
    if i < m / 2 {
        i as i64
    } else {
        i as i64 - m as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(TorusGrid::new(1, 6).is_err());
        assert!(TorusGrid::new(1, 4).is_err());
        assert!(TorusGrid::new(3, 8).is_err());
        assert!(TorusGrid::new(2, 16).is_ok());
    }

    #[test]
    fn nodes_cover_unit_cell_once() {
        let grid = TorusGrid::new(2, 8).unwrap();
        let mut seen: Vec<(i64, i64)> = (0..grid.len())
            .map(|i| {
                let x = grid.node(i);
                ((x[0] * 8.0).round() as i64, (x[1] * 8.0).round() as i64)
            })
            .collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 64);
        assert!(seen
            .iter()
            .all(|&(a, b)| (0..8).contains(&a) && (0..8).contains(&b)));
    }

    #[test]
    fn spectral_index_matches_wavevector() {
        let grid = TorusGrid::new(2, 8).unwrap();
        for n0 in -3..=3 {
            for n1 in -3..=3 {
                let idx = grid.spectral_index(&[n0, n1]).unwrap();
                assert_eq!(grid.wavevector(idx), &[n0, n1]);
            }
        }
        assert!(grid.spectral_index(&[4, 0]).is_none());
    }
}
