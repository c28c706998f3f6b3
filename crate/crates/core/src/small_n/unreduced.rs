//! Two particles in the full state `(x¹, x², a¹, a²)`, used to check the
//! clock-difference reduction.
//!
//! Clocks live on `[0, A]`. In reversed time the clock terms read
//! `V(xⁱ)∂_{aⁱ}v` with `V ≥ 0`, so information enters from larger clocks:
//! the differences are one-sided forward (second order where two forward
//! neighbours exist, first order next to the top, zero at the top). Values
//! are trustworthy only where `aⁱ ≤ A − (T − t0) sup V`.

use num_complex::Complex64;
use rayon::prelude::*;

use super::reduced::{derivative, pair_weights};
use crate::error::{Error, Result};
use crate::mean_field::etd::Etd4;
use crate::mean_field::ProblemSpec;
use crate::torus::TorusGrid;

#[derive(Debug, Clone)]
pub struct UnreducedTable {
    points: usize,
    clocks: Vec<f64>,
    /// Layout `[a¹][a²][x¹][x²]` at time `t0`.
    values: Vec<f64>,
}

impl UnreducedTable {
    pub fn points(&self) -> usize {
        self.points
    }

    pub fn clocks(&self) -> &[f64] {
        &self.clocks
    }

    pub fn value(&self, i1: usize, i2: usize, j1: usize, j2: usize) -> f64 {
        let m = self.points;
        let ma = self.clocks.len();
        self.values[((j1 * ma + j2) * m + i1) * m + i2]
    }
}

/// `v²(t0, ·)` on `points² × clock_points²` nodes, clocks in `[0, clock_max]`.
pub fn solve_v2_unreduced(
    spec: &ProblemSpec,
    points: usize,
    clock_points: usize,
    clock_max: f64,
    dt: f64,
) -> Result<UnreducedTable> {
    if spec.grid().dim() != 1 {
        return Err(Error::UnsupportedDimension(spec.grid().dim()));
    }
    if clock_points < 3 || !(clock_max > 0.0) {
        return Err(Error::InvalidArgument(
            "clock grid needs >= 3 points and a positive range".into(),
        ));
    }
    let m = points;
    let grid = TorusGrid::new(2, m)?;
    let span = spec.horizon() - spec.t0();
    let steps = (span / dt).round();
    if !(dt > 0.0) || steps < 1.0 || (steps * dt - span).abs() > 1e-9 * span {
        return Err(Error::InvalidArgument(format!(
            "time step {dt} does not divide {span}"
        )));
    }
    let steps = steps as usize;
    let dt = span / steps as f64;
    let ma = clock_points;
    let h = clock_max / (ma - 1) as f64;
    let clocks: Vec<f64> = (0..ma).map(|j| j as f64 * h).collect();

    let v_eval = spec.potential().evaluator();
    let g_eval = spec.terminal().evaluator();
    let v_axis: Vec<f64> = (0..m)
        .map(|i| v_eval.eval(&[i as f64 / m as f64]))
        .collect();
    let g_axis: Vec<f64> = (0..m)
        .map(|i| g_eval.eval(&[i as f64 / m as f64]))
        .collect();
    let v_max = v_axis.iter().fold(0.0_f64, |a, &v| a.max(v));
    // the second-order stencil has weight 3/2 on the diagonal
    let ratio = 1.5 * dt * v_max / h;
    if ratio > 1.0 {
        return Err(Error::Cfl { ratio });
    }

    let slice_len = m * m;
    let total = ma * ma * slice_len;
    let mut values = vec![0.0; total];
    let mut n_factors = Vec::with_capacity(ma * ma);
    for j1 in 0..ma {
        for j2 in 0..ma {
            let d = clocks[j1] - clocks[j2];
            let (w1, w2) = pair_weights(d);
            n_factors.push((1.0 / w1, 1.0 / w2));
            let base = (j1 * ma + j2) * slice_len;
            for k in 0..slice_len {
                values[base + k] = w1 * g_axis[k / m] + w2 * g_axis[k % m];
            }
        }
    }
    let mut coeffs: Vec<Complex64> = values
        .par_chunks(slice_len)
        .flat_map_iter(|v| grid.forward_real(v))
        .collect();
    let etd = Etd4::diffusion(&grid, dt);
    let forward = |w: &[f64], j: usize, stride: usize, at: usize| -> f64 {
        let here = w[at];
        if j + 2 < ma {
            (-3.0 * here + 4.0 * w[at + stride] - w[at + 2 * stride]) / (2.0 * h)
        } else if j + 1 < ma {
            (w[at + stride] - here) / h
        } else {
            0.0
        }
    };
    for _ in 0..steps {
        etd.step(&mut coeffs, |_, c| {
            let parts: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = c
                .par_chunks(slice_len)
                .map(|c| {
                    (
                        grid.inverse_real(c),
                        derivative(&grid, c, 0),
                        derivative(&grid, c, 1),
                    )
                })
                .collect();
            let mut w = Vec::with_capacity(total);
            for p in &parts {
                w.extend_from_slice(&p.0);
            }
            let rhs: Vec<Complex64> = (0..ma * ma)
                .into_par_iter()
                .flat_map_iter(|s| {
                    let (j1, j2) = (s / ma, s % ma);
                    let (n1, n2) = n_factors[s];
                    let base = s * slice_len;
                    let (_, p1, p2) = &parts[s];
                    let r: Vec<f64> = (0..slice_len)
                        .map(|k| {
                            let at = base + k;
                            let d1 = forward(&w, j1, ma * slice_len, at);
                            let d2 = forward(&w, j2, slice_len, at);
                            v_axis[k / m] * d1 + v_axis[k % m] * d2
                                - 0.5 * n1 * p1[k] * p1[k]
                                - 0.5 * n2 * p2[k] * p2[k]
                        })
                        .collect();
                    grid.forward_real(&r)
                })
                .collect();
            Ok(rhs)
        })?;
    }
    let values: Vec<f64> = coeffs
        .par_chunks(slice_len)
        .flat_map_iter(|c| grid.inverse_real(c))
        .collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Blowup {
            time: spec.t0(),
            sup: f64::INFINITY,
            bound: spec.terminal().sup_norm(),
        });
    }
    Ok(UnreducedTable {
        points: m,
        clocks,
        values,
    })
}
