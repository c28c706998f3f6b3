//! Sobolev `H^k` norms and their duals `H^{-k}` through Fourier multipliers.
//!
//! The `H^k` inner product sums `∫ ∇^j φ ∇^j ψ` over all multi-indices with
//! `|j| ≤ k`, which is diagonal in Fourier space with multiplier
//! `m_k(n) = Σ_{|j|≤k} Π_i (2π n_i)^{2 j_i}`. The dual norm of a signed
//! measure `q` is then `(Σ_n |q̂_n|² / m_k(n))^{1/2}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::ScalarField;
use super::grid::TorusGrid;
use crate::error::{Error, Result};

/// Integer Sobolev order `k ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SobolevIndex(u32);

impl SobolevIndex {
    pub fn new(order: u32) -> Self {
        Self(order)
    }

    /// Smallest integer `k > d/2 + 2`: 3 on the circle, 4 on the 2-torus.
    pub fn default_for_dim(dim: usize) -> Self {
        Self((dim as u32) / 2 + 3)
    }

    pub fn order(self) -> u32 {
        self.0
    }

    /// `m_k(n)`, computed by the recursion over the last axis.
    pub fn multiplier(self, n: &[i64]) -> f64 {
        let squares: Vec<f64> = n.iter().map(|&k| (2.0 * PI * k as f64).powi(2)).collect();
        multiplier_rec(&squares, self.0)
    }

    /// Upper bound on `Σ 1/m_k(n)` over wavevectors outside the band `|n_i| < M/2`.
    ///
    /// Infinite when the sum diverges (`k` too small for the dimension).
    pub fn out_of_band_sum(self, grid: &TorusGrid) -> f64 {
        let k = self.0 as i32;
        let r = (grid.points_per_axis() / 2) as f64;
        let two_pi_2k = (2.0 * PI).powi(2 * k);
        match grid.dim() {
            1 if k >= 1 => {
                2.0 / two_pi_2k * (r.powi(-2 * k) + r.powi(1 - 2 * k) / (2 * k - 1) as f64)
            }
            2 if k >= 2 => {
                // m_k(n) ≥ (2π)^{2k} |n|^{2k} / 2^k and #{|n|_∞ = s} = 8s
                2f64.powi(k) / two_pi_2k
                    * 8.0
                    * (r.powi(1 - 2 * k) + r.powi(2 - 2 * k) / (2 * k - 2) as f64)
            }
            _ => f64::INFINITY,
        }
    }
}

fn multiplier_rec(squares: &[f64], k: u32) -> f64 {
    match squares.split_last() {
        None => 1.0,
        Some((&last, rest)) => {
            let mut acc = 0.0;
            let mut pow = 1.0;
            for j in 0..=k {
                acc += pow * multiplier_rec(rest, k - j);
                pow *= last;
            }
            acc
        }
    }
}

/// A (signed) measure whose Fourier coefficients are available on a grid's band.
pub trait MeasureSpectrum {
    /// `q̂_n = ∫ e^{-2πi n·x} dq(x)` for in-band indices of `grid`, zero elsewhere.
    fn band_coefficients(&self, grid: &TorusGrid) -> Result<Vec<Complex64>>;

    /// Total variation `|q|(𝕋^d)`; bounds every `|q̂_n|`.
    fn total_variation(&self) -> f64;

    /// Whether coefficients outside the band may be nonzero.
    fn has_tail(&self) -> bool;
}

impl MeasureSpectrum for ScalarField {
    fn band_coefficients(&self, grid: &TorusGrid) -> Result<Vec<Complex64>> {
        grid.check_same(self.grid())?;
        Ok(self
            .spectrum()
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                if grid.in_band(i) {
                    c
                } else {
                    Complex64::default()
                }
            })
            .collect())
    }

    fn total_variation(&self) -> f64 {
        self.values().iter().map(|v| v.abs()).sum::<f64>() / self.values().len() as f64
    }

    fn has_tail(&self) -> bool {
        false
    }
}

/// A dual-norm value truncated to the resolved band, with a bound on what was cut.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualNorm {
    pub value: f64,
    /// Bound on the squared norm carried by wavevectors outside the band.
    pub tail_sq_bound: f64,
}

impl DualNorm {
    /// Largest value the untruncated norm can take.
    pub fn upper(&self) -> f64 {
        (self.value * self.value + self.tail_sq_bound).sqrt()
    }

    /// Bound on `untruncated - value`.
    pub fn truncation_error(&self) -> f64 {
        self.upper() - self.value
    }
}

/// `‖f‖_{H^k}`, summed over the resolved band.
pub fn h_norm(f: &ScalarField, k: SobolevIndex) -> f64 {
    let grid = f.grid();
    f.spectrum()
        .iter()
        .enumerate()
        .filter(|(i, _)| grid.in_band(*i))
        .map(|(i, c)| c.norm_sqr() * k.multiplier(grid.wavevector(i)))
        .sum::<f64>()
        .sqrt()
}

/// `‖q‖_{H^{-k}}` of a signed measure resolved on `grid`.
pub fn h_dual_norm(
    q: &impl MeasureSpectrum,
    grid: &TorusGrid,
    k: SobolevIndex,
) -> Result<DualNorm> {
    let coeffs = q.band_coefficients(grid)?;
    let tv = q.total_variation();
    Ok(dual_from_coefficients(
        grid,
        &coeffs,
        tv * tv,
        q.has_tail(),
        k,
    ))
}

/// `‖a − b‖_{H^{-k}}` for two measures (densities or atoms) resolved on `grid`.
pub fn h_dual_distance(
    a: &impl MeasureSpectrum,
    b: &impl MeasureSpectrum,
    grid: &TorusGrid,
    k: SobolevIndex,
) -> Result<DualNorm> {
    let ca = a.band_coefficients(grid)?;
    let cb = b.band_coefficients(grid)?;
    let diff: Vec<Complex64> = ca.iter().zip(&cb).map(|(x, y)| x - y).collect();
    let tv = a.total_variation() + b.total_variation();
    Ok(dual_from_coefficients(
        grid,
        &diff,
        tv * tv,
        a.has_tail() || b.has_tail(),
        k,
    ))
}

pub(crate) fn dual_from_coefficients(
    grid: &TorusGrid,
    coeffs: &[Complex64],
    tv_sq: f64,
    has_tail: bool,
    k: SobolevIndex,
) -> DualNorm {
    let value = coeffs
        .iter()
        .enumerate()
        .filter(|(i, _)| grid.in_band(*i))
        .map(|(i, c)| c.norm_sqr() / k.multiplier(grid.wavevector(i)))
        .sum::<f64>()
        .sqrt();
    let tail_sq_bound = if has_tail {
        tv_sq * k.out_of_band_sum(grid)
    } else {
        0.0
    };
    DualNorm {
        value,
        tail_sq_bound,
    }
}

/// Dual norm of a grid field difference, without allocating a new field.
pub(crate) fn dual_norm_of_values(grid: &TorusGrid, diff: &[f64], k: SobolevIndex) -> f64 {
    let coeffs = grid.forward_real(diff);
    dual_from_coefficients(grid, &coeffs, 0.0, false, k).value
}

pub(crate) fn check_dimension(grid: &TorusGrid, dim: usize) -> Result<()> {
    if grid.dim() == dim {
        Ok(())
    } else {
        Err(Error::GridMismatch(format!(
            "measure of dimension {dim} on a {}-dimensional grid",
            grid.dim()
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Literal sum over all multi-indices `j` with `|j| ≤ k`.
    fn brute_multiplier(n: &[i64], k: u32) -> f64 {
        let d = n.len();
        let mut total = 0.0;
        let mut j = vec![0u32; d];
        loop {
            if j.iter().sum::<u32>() <= k {
                total += n
                    .iter()
                    .zip(&j)
                    .map(|(&ni, &ji)| (2.0 * PI * ni as f64).powi(2 * ji as i32))
                    .product::<f64>();
            }
            let mut axis = 0;
            loop {
                if axis == d {
                    return total;
                }
                j[axis] += 1;
                if j[axis] <= k {
                    break;
                }
                j[axis] = 0;
                axis += 1;
            }
        }
    }

    #[test]
    fn multiplier_matches_multi_index_enumeration() {
        for k in 0..=4 {
            let idx = SobolevIndex::new(k);
            for a in -8..=8i64 {
                assert_relative_eq!(
                    idx.multiplier(&[a]),
                    brute_multiplier(&[a], k),
                    max_relative = 1e-13
                );
                for b in -8..=8i64 {
                    assert_relative_eq!(
                        idx.multiplier(&[a, b]),
                        brute_multiplier(&[a, b], k),
                        max_relative = 1e-13
                    );
                }
            }
        }
    }

    #[test]
    fn multiplier_is_monotone_and_at_least_one() {
        let k = SobolevIndex::new(3);
        assert_eq!(k.multiplier(&[0, 0]), 1.0);
        for a in 0..10i64 {
            for b in 0..10i64 {
                let m = k.multiplier(&[a, b]);
                assert!(m >= 1.0);
                assert!(k.multiplier(&[a + 1, b]) > m);
                assert!(k.multiplier(&[-a, b]) == m);
            }
        }
    }

    #[test]
    fn default_orders() {
        assert_eq!(SobolevIndex::default_for_dim(1).order(), 3);
        assert_eq!(SobolevIndex::default_for_dim(2).order(), 4);
    }

    #[test]
    fn out_of_band_bound_dominates_direct_sum() {
        let grid = TorusGrid::new(1, 16).unwrap();
        let k = SobolevIndex::new(2);
        let direct: f64 = (8..200_000i64).map(|n| 2.0 / k.multiplier(&[n])).sum();
        let bound = k.out_of_band_sum(&grid);
        assert!(bound >= direct && bound < 2.0 * direct);

        let grid2 = TorusGrid::new(2, 8).unwrap();
        let k2 = SobolevIndex::new(3);
        let mut direct2 = 0.0;
        for a in -300i64..=300 {
            for b in -300i64..=300 {
                if a.abs() >= 4 || b.abs() >= 4 {
                    direct2 += 1.0 / k2.multiplier(&[a, b]);
                }
            }
        }
        assert!(k2.out_of_band_sum(&grid2) >= direct2);
        assert!(SobolevIndex::new(1).out_of_band_sum(&grid2).is_infinite());
    }

    #[test]
    fn single_mode_dual_norm_closed_form() {
        let grid = TorusGrid::new(1, 32).unwrap();
        let k = SobolevIndex::new(3);
        let amp = 0.3;
        let f = ScalarField::from_fn(&grid, |x| amp * (2.0 * PI * 3.0 * x[0]).cos());
        let got = h_dual_norm(&f, &grid, k).unwrap();
        // cos splits into two coefficients of size amp/2
        let expected = (amp / 2.0) * (2.0 / k.multiplier(&[3])).sqrt();
        assert_relative_eq!(got.value, expected, max_relative = 1e-12);
        assert_eq!(got.tail_sq_bound, 0.0);

        let hn = h_norm(&f, k);
        assert_relative_eq!(
            hn,
            (amp / 2.0) * (2.0 * k.multiplier(&[3])).sqrt(),
            max_relative = 1e-12
        );
    }
}
