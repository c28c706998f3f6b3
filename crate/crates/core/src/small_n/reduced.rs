//! The two-particle value function on the circle in reduced coordinates.
//!
//! Weights and terminal cost depend on the clocks only through
//! `δ = a¹ − a²`, and the clocks move by the same kind of increments, so
//! `v²(t, x, a) = w(t, x¹, x², δ)` with, in reversed time `τ = T − t`,
//!
//! `∂_τ w = ½(Δ₁ + Δ₂)w + (V(x¹) − V(x²))∂_δ w − Σᵢ (nⁱ/2)|∂_{xⁱ} w|²`,
//!
//! `n¹ = 1 + e^δ`, `n² = 1 + e^{−δ}`. Space is spectral on the 2-torus;
//! `∂_δ` is first-order upwind with zero-gradient ends.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mean_field::etd::Etd4;
use crate::mean_field::ProblemSpec;
use crate::torus::atomic::wrap_unit;
use crate::torus::TorusGrid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReducedConfig {
    /// Points per spatial axis.
    pub points: usize,
    /// Odd number of clock-difference nodes on `[−Δmax, Δmax]`.
    pub delta_points: usize,
    pub delta_max: f64,
    pub dt: f64,
    /// Times (mesh nodes of `dt` from `t0`) at which slices are kept.
    pub snapshots: Vec<f64>,
}

/// Snapshots of `w(t, x¹, x², δ)`, laid out `[δ][x¹][x²]`.
#[derive(Debug, Clone)]
pub struct ValueTable2 {
    points: usize,
    deltas: Vec<f64>,
    times: Vec<f64>,
    slices: Vec<Vec<f64>>,
    /// `sup_t ‖w_t‖_∞` over every step, not only stored ones.
    sup_norm: f64,
}

/// `(1/n¹, 1/n²)` at clock difference `δ`.
pub fn pair_weights(delta: f64) -> (f64, f64) {
    // logistic written to avoid overflow on either side
    if delta >= 0.0 {
        let e = (-delta).exp();
        (e / (1.0 + e), 1.0 / (1.0 + e))
    } else {
        let e = delta.exp();
        (1.0 / (1.0 + e), e / (1.0 + e))
    }
}

impl ValueTable2 {
    pub fn points(&self) -> usize {
        self.points
    }

    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    pub fn delta_max(&self) -> f64 {
        *self.deltas.last().expect("nonempty")
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    /// Stored value at node `(i1, i2, j)` of snapshot `s`.
    pub fn node(&self, s: usize, i1: usize, i2: usize, j: usize) -> f64 {
        let m = self.points;
        self.slices[s][(j * m + i1) * m + i2]
    }

    pub fn slice(&self, s: usize) -> &[f64] {
        &self.slices[s]
    }

    fn snapshot_index(&self, t: f64) -> Result<usize> {
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= 1e-9 * (1.0 + t.abs()))
            .ok_or_else(|| Error::OutOfRange(format!("time {t} is not a stored snapshot")))
    }

    /// `v²(t, x, a)` by multilinear interpolation in `(x¹, x², δ)`, periodic in `x`.
    pub fn evaluate(&self, t: f64, x: [f64; 2], a: [f64; 2]) -> Result<f64> {
        let s = self.snapshot_index(t)?;
        let delta = a[0] - a[1];
        let dmax = self.delta_max();
        if !(delta.abs() <= dmax * (1.0 + 1e-12)) {
            return Err(Error::OutOfRange(format!(
                "clock difference {delta} outside [−{dmax}, {dmax}]"
            )));
        }
        let m = self.points;
        let locate_x = |x: f64| {
            let p = wrap_unit(x) * m as f64;
            let (i, f) = split(p);
            (i % m, (i + 1) % m, f)
        };
        let (a1, b1, f1) = locate_x(x[0]);
        let (a2, b2, f2) = locate_x(x[1]);
        let h = 2.0 * dmax / (self.deltas.len() - 1) as f64;
        let (mut j, mut fd) =
            split(((delta + dmax) / h).clamp(0.0, (self.deltas.len() - 1) as f64));
        if j == self.deltas.len() - 1 {
            j -= 1;
            fd = 1.0;
        }
        let corner = |i1: usize, i2: usize, jj: usize| self.node(s, i1, i2, jj);
        let mut acc = 0.0;
        for (i1, w1) in [(a1, 1.0 - f1), (b1, f1)] {
            for (i2, w2) in [(a2, 1.0 - f2), (b2, f2)] {
                for (jj, w3) in [(j, 1.0 - fd), (j + 1, fd)] {
                    let w = w1 * w2 * w3;
                    if w != 0.0 {
                        acc += w * corner(i1, i2, jj);
                    }
                }
            }
        }
        Ok(acc)
    }
}

/// Integer part and fraction, snapping fractions within `1e−9` of a node.
fn split(p: f64) -> (usize, f64) {
    let r = p.round();
    if (p - r).abs() < 1e-9 {
        return (r as usize, 0.0);
    }
    let i = p.floor();
    (i as usize, p - i)
}

/// Marches `w` backward from `T` on the reduced grid.
pub fn solve_v2_reduced(spec: &ProblemSpec, config: &ReducedConfig) -> Result<ValueTable2> {
    if spec.grid().dim() != 1 {
        return Err(Error::UnsupportedDimension(spec.grid().dim()));
    }
    let m = config.points;
    let grid = TorusGrid::new(2, m)?;
    let md = config.delta_points;
    if md < 3 || md.is_multiple_of(2) || !(config.delta_max > 0.0) {
        return Err(Error::InvalidArgument(
            "clock-difference grid needs an odd count >= 3 and a positive half-width".into(),
        ));
    }
    let span = spec.horizon() - spec.t0();
    let steps = (span / config.dt).round();
    if !(config.dt > 0.0) || steps < 1.0 || (steps * config.dt - span).abs() > 1e-9 * span {
        return Err(Error::InvalidArgument(format!(
            "time step {} does not divide the horizon length {span}",
            config.dt
        )));
    }
    let steps = steps as usize;
    let dt = span / steps as f64;
    let h = 2.0 * config.delta_max / (md - 1) as f64;
    let deltas: Vec<f64> = (0..md).map(|j| -config.delta_max + j as f64 * h).collect();

    let v_eval = spec.potential().evaluator();
    let g_eval = spec.terminal().evaluator();
    let axis: Vec<f64> = (0..m).map(|i| i as f64 / m as f64).collect();
    let v_axis: Vec<f64> = axis.iter().map(|&x| v_eval.eval(&[x])).collect();
    let g_axis: Vec<f64> = axis.iter().map(|&x| g_eval.eval(&[x])).collect();
    let speed: Vec<f64> = (0..m * m).map(|k| v_axis[k / m] - v_axis[k % m]).collect();
    let max_speed = speed.iter().fold(0.0_f64, |a, s| a.max(s.abs()));
    let ratio = dt * max_speed / h;
    if ratio > 1.0 {
        return Err(Error::Cfl { ratio });
    }

    // snapshot step indices, counted from t0
    let mut wanted = Vec::new();
    for &t in &config.snapshots {
        let x = (t - spec.t0()) / dt;
        let i = x.round();
        if i < 0.0 || i > steps as f64 || (x - i).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "snapshot time {t} is not a mesh node"
            )));
        }
        wanted.push((i as usize, t));
    }

    let slice_len = m * m;
    let mut values = vec![0.0; md * slice_len];
    for (j, &d) in deltas.iter().enumerate() {
        let (w1, w2) = pair_weights(d);
        for k in 0..slice_len {
            values[j * slice_len + k] = w1 * g_axis[k / m] + w2 * g_axis[k % m];
        }
    }
    let n_factors: Vec<(f64, f64)> = deltas
        .iter()
        .map(|&d| (1.0 + d.exp(), 1.0 + (-d).exp()))
        .collect();

    let mut coeffs = vec![Complex64::default(); values.len()];
    forward_slices(&grid, &values, &mut coeffs);
    let etd = Etd4::diffusion(&grid, dt);
    let mut stored: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut sup = values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let keep = |step: usize, vals: &[f64], stored: &mut Vec<(f64, Vec<f64>)>| {
        for &(i, t) in &wanted {
            if i == step {
                stored.push((t, vals.to_vec()));
            }
        }
    };
    keep(steps, &values, &mut stored);

    for step in (0..steps).rev() {
        etd.step(&mut coeffs, |_, c| {
            let mut w = vec![0.0; c.len()];
            let mut g1 = vec![0.0; c.len()];
            let mut g2 = vec![0.0; c.len()];
            w.par_chunks_mut(slice_len)
                .zip(g1.par_chunks_mut(slice_len))
                .zip(g2.par_chunks_mut(slice_len))
                .zip(c.par_chunks(slice_len))
                .for_each(|(((w, g1), g2), c)| {
                    w.copy_from_slice(&grid.inverse_real(c));
                    g1.copy_from_slice(&derivative(&grid, c, 0));
                    g2.copy_from_slice(&derivative(&grid, c, 1));
                });
            let mut rhs = vec![0.0; c.len()];
            rhs.par_chunks_mut(slice_len)
                .enumerate()
                .for_each(|(j, r)| {
                    let (n1, n2) = n_factors[j];
                    let base = j * slice_len;
                    for k in 0..slice_len {
                        let s = speed[k];
                        let here = w[base + k];
                        let slope = if s > 0.0 {
                            if j + 1 < md {
                                (w[base + slice_len + k] - here) / h
                            } else {
                                0.0
                            }
                        } else if s < 0.0 {
                            if j > 0 {
                                (here - w[base - slice_len + k]) / h
                            } else {
                                0.0
                            }
                        } else {
                            0.0
                        };
                        let p1 = g1[base + k];
                        let p2 = g2[base + k];
                        r[k] = s * slope - 0.5 * n1 * p1 * p1 - 0.5 * n2 * p2 * p2;
                    }
                });
            let mut out = vec![Complex64::default(); c.len()];
            forward_slices(&grid, &rhs, &mut out);
            Ok(out)
        })?;
        inverse_slices(&grid, &coeffs, &mut values);
        let s = values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        if !s.is_finite() {
            return Err(Error::Blowup {
                time: spec.t0() + step as f64 * dt,
                sup: s,
                bound: spec.terminal().sup_norm(),
            });
        }
        sup = sup.max(s);
        keep(step, &values, &mut stored);
    }
    stored.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(ValueTable2 {
        points: m,
        deltas,
        times: stored.iter().map(|s| s.0).collect(),
        slices: stored.into_iter().map(|s| s.1).collect(),
        sup_norm: sup,
    })
}

pub(super) fn derivative(grid: &TorusGrid, c: &[Complex64], axis: usize) -> Vec<f64> {
    let d: Vec<Complex64> = c
        .iter()
        .enumerate()
        .map(|(i, x)| grid.derivative_multiplier(i, axis) * x)
        .collect();
    grid.inverse_real(&d)
}

fn forward_slices(grid: &TorusGrid, values: &[f64], out: &mut [Complex64]) {
    let n = grid.len();
    out.par_chunks_mut(n)
        .zip(values.par_chunks(n))
        .for_each(|(o, v)| o.copy_from_slice(&grid.forward_real(v)));
}

fn inverse_slices(grid: &TorusGrid, coeffs: &[Complex64], out: &mut [f64]) {
    let n = grid.len();
    out.par_chunks_mut(n)
        .zip(coeffs.par_chunks(n))
        .for_each(|(o, c)| o.copy_from_slice(&grid.inverse_real(c)));
}

/// Discrete residual of the reduced equation at snapshot `s`, interior `δ` nodes.
///
/// The time derivative is the centered difference of snapshots `s−1` and
/// `s+1`, which must be one step `dt` apart from `s`; the spatial operator is
/// the scheme's own (spectral in `x`, upwind in `δ`).
pub fn reduced_residual(spec: &ProblemSpec, table: &ValueTable2, s: usize) -> Result<f64> {
    if s == 0 || s + 1 >= table.times.len() {
        return Err(Error::InvalidArgument(
            "residual needs neighbouring snapshots".into(),
        ));
    }
    let dt_minus = table.times[s] - table.times[s - 1];
    let dt_plus = table.times[s + 1] - table.times[s];
    if (dt_minus - dt_plus).abs() > 1e-9 * dt_plus {
        return Err(Error::InvalidArgument(
            "snapshots must be equally spaced".into(),
        ));
    }
    let m = table.points;
    let grid = TorusGrid::new(2, m)?;
    let md = table.deltas.len();
    let h = table.deltas[1] - table.deltas[0];
    let v_eval = spec.potential().evaluator();
    let v_axis: Vec<f64> = (0..m)
        .map(|i| v_eval.eval(&[i as f64 / m as f64]))
        .collect();
    let slice_len = m * m;
    let w = &table.slices[s];
    let mut worst: f64 = 0.0;
    for j in 1..md - 1 {
        let d = table.deltas[j];
        let (n1, n2) = (1.0 + d.exp(), 1.0 + (-d).exp());
        let slice = &w[j * slice_len..(j + 1) * slice_len];
        let coeffs = grid.forward_real(slice);
        let lap: Vec<Complex64> = coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let k0 = grid.derivative_multiplier(i, 0);
                let k1 = grid.derivative_multiplier(i, 1);
                (k0 * k0 + k1 * k1) * c
            })
            .collect();
        let lap = grid.inverse_real(&lap);
        let p1 = derivative(&grid, &coeffs, 0);
        let p2 = derivative(&grid, &coeffs, 1);
        for k in 0..slice_len {
            let speed = v_axis[k / m] - v_axis[k % m];
            let here = slice[k];
            let slope = if speed > 0.0 {
                (w[(j + 1) * slice_len + k] - here) / h
            } else if speed < 0.0 {
                (here - w[(j - 1) * slice_len + k]) / h
            } else {
                0.0
            };
            let dt_w = (table.slices[s + 1][j * slice_len + k]
                - table.slices[s - 1][j * slice_len + k])
                / (2.0 * dt_plus);
            // −∂_t w − ½Δw − c ∂_δ w + Σ nⁱ/2 |∂_{xⁱ} w|²
            let r = -dt_w - 0.5 * lap[k] - speed * slope
                + 0.5 * n1 * p1[k] * p1[k]
                + 0.5 * n2 * p2[k] * p2[k];
            worst = worst.max(r.abs());
        }
    }
    Ok(worst)
}
