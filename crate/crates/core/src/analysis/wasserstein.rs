//! First Wasserstein distance on the circle.

use crate::error::{Error, Result};
use crate::torus::{AtomicMeasure, ScalarField};

/// A probability measure on the circle.
#[derive(Debug, Clone, Copy)]
pub enum CircleMeasure<'a> {
    /// Grid density, read as atoms of mass `μᵢ h` at the nodes.
    Density(&'a ScalarField),
    Atoms(&'a AtomicMeasure),
}

impl CircleMeasure<'_> {
    fn atoms(&self) -> Result<Vec<(f64, f64)>> {
        match self {
            CircleMeasure::Density(f) => {
                let grid = f.grid();
                if grid.dim() != 1 {
                    return Err(Error::UnsupportedDimension(grid.dim()));
                }
                let h = grid.cell_volume();
                let mass: f64 = f.values().iter().sum::<f64>() * h;
                Ok(f.values()
                    .iter()
                    .enumerate()
                    .map(|(i, v)| (grid.coordinate(i, 0), v * h / mass))
                    .collect())
            }
            CircleMeasure::Atoms(a) => {
                if a.dim() != 1 {
                    return Err(Error::UnsupportedDimension(a.dim()));
                }
                Ok(a.positions()
                    .iter()
                    .copied()
                    .zip(a.weights().iter().copied())
                    .collect())
            }
        }
    }
}

/// `d₁(μ, ν) = min_s ∫₀¹ |F_μ − F_ν − s|`, attained at a weighted median of
/// the CDF difference. Exact for atoms.
pub fn wasserstein1_circle(mu: CircleMeasure<'_>, nu: CircleMeasure<'_>) -> Result<f64> {
    let mut events: Vec<(f64, f64)> = mu.atoms()?;
    events.extend(nu.atoms()?.into_iter().map(|(x, w)| (x, -w)));
    events.sort_by(|a, b| a.0.total_cmp(&b.0));

    // D is constant on [x_j, x_{j+1}); the piece before the first atom
    // joins the last one across 0.
    let mut pieces: Vec<(f64, f64)> = Vec::with_capacity(events.len());
    let mut d = 0.0;
    for (j, &(x, w)) in events.iter().enumerate() {
        d += w;
        let next = events.get(j + 1).map_or(1.0 + events[0].0, |e| e.0);
        let len = next - x;
        if len > 0.0 {
            pieces.push((d, len));
        }
    }
    if pieces.is_empty() {
        return Ok(0.0);
    }
    let s = weighted_median(&mut pieces.clone());
    Ok(pieces.iter().map(|&(d, len)| len * (d - s).abs()).sum())
}

fn weighted_median(pieces: &mut [(f64, f64)]) -> f64 {
    pieces.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pieces.iter().map(|p| p.1).sum();
    let mut acc = 0.0;
    for &(d, len) in pieces.iter() {
        acc += len;
        if acc >= 0.5 * total {
            return d;
        }
    }
    pieces.last().expect("nonempty").0
}
