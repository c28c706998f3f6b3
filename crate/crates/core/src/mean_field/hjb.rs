//! Backward equations: the nonlocal HJB for the adjoint and its linearization.
//!
//! Both are marched in reversed time `τ = T − t`, where they read
//! `∂_τ U = ½ΔU + N(U)`, with diffusion integrated exactly in Fourier space.

use crate::error::{Error, Result};
use crate::torus::ScalarField;

use super::etd::{Etd4, Stage};
use super::hamiltonian::value_and_scale;
use super::paths::{check_mesh, combine, stage_weights, AdjointPath, ControlPath, MeasurePath};
use super::problem::ProblemSpec;

/// Solves `−∂_t u − ½Δu + H^R(∇u) + (V − ⟨V;μ_t⟩)u − V⟨u_t;μ_t⟩ = 0`, `u_T = g`.
///
/// Aborts if `‖u_t‖_∞` exceeds ten times `exp(∫_t^T ⟨V;μ_s⟩ds)‖g‖_∞`.
pub fn hjb_backward_solve(spec: &ProblemSpec, mu: &MeasurePath) -> Result<AdjointPath> {
    check_path(spec, mu)?;
    let r = spec.radius().value();
    let v = spec.potential().values();
    backward_march(
        spec,
        mu,
        spec.terminal(),
        spec.steps(),
        |_, _, u, grad, mean_v, pair| {
            (0..u.len())
                .map(|j| {
                    let norm = grad.iter().map(|g| g[j] * g[j]).sum::<f64>().sqrt();
                    let (h, _) = value_and_scale(norm, r);
                    -h - (v[j] - mean_v) * u[j] + v[j] * pair
                })
                .collect()
        },
    )
}

/// Solves `−∂_t φ − ½Δφ − α·∇φ + (V − ⟨V;μ_t⟩)φ − V⟨φ_t;μ_t⟩ = 0` backward
/// from `φ_{t1} = terminal` on `[t0, t1]`; `t1` must be a mesh node.
pub fn linearized_backward_solve(
    spec: &ProblemSpec,
    mu: &MeasurePath,
    alpha: &ControlPath,
    terminal: &ScalarField,
    t1: f64,
) -> Result<AdjointPath> {
    check_path(spec, mu)?;
    check_mesh(spec, alpha.len())?;
    spec.grid().check_same(terminal.grid())?;
    spec.grid().check_same(alpha.grid())?;
    let last = spec
        .mesh_index(t1)
        .ok_or_else(|| Error::InvalidArgument(format!("terminal time {t1} is not a mesh node")))?;
    let v = spec.potential().values();
    let nodes = spec.steps() + 1;
    let per_axis: Vec<Vec<ScalarField>> = (0..spec.grid().dim())
        .map(|axis| (0..nodes).map(|i| alpha.at(i)[axis].clone()).collect())
        .collect();
    backward_march(
        spec,
        mu,
        terminal,
        last,
        |i, stage, phi, grad, mean_v, pair| {
            let weights = stage_weights(i, nodes, stage);
            let mut out: Vec<f64> = (0..phi.len())
                .map(|j| -(v[j] - mean_v) * phi[j] + v[j] * pair)
                .collect();
            for (axis, fields) in per_axis.iter().enumerate() {
                let a = combine(fields, &weights);
                for (o, (x, g)) in out.iter_mut().zip(a.iter().zip(&grad[axis])) {
                    *o += x * g;
                }
            }
            out
        },
    )
}

fn check_path(spec: &ProblemSpec, mu: &MeasurePath) -> Result<()> {
    check_mesh(spec, mu.len())?;
    spec.grid().check_same(mu.initial().grid())
}

/// Shared backward driver. `rhs(interval, stage, U, ∇U, ⟨V;μ_s⟩, ⟨U;μ_s⟩)`
/// returns the explicit part in physical space; `stage` refers to forward time.
fn backward_march(
    spec: &ProblemSpec,
    mu: &MeasurePath,
    terminal: &ScalarField,
    last: usize,
    rhs: impl Fn(usize, Stage, &[f64], &[Vec<f64>], f64, f64) -> Vec<f64>,
) -> Result<AdjointPath> {
    let grid = spec.grid();
    let v = spec.potential().values();
    let nodes = spec.steps() + 1;
    let etd = Etd4::diffusion(grid, spec.dt());
    let dim = grid.dim();

    let mean_v = mu.pair_with(spec.potential());
    // exp(∫_t^{t_last} ⟨V;μ_s⟩ ds) by the trapezoid rule
    let mut growth = vec![1.0; last + 1];
    for i in (0..last).rev() {
        growth[i] = growth[i + 1] * (0.5 * spec.dt() * (mean_v[i] + mean_v[i + 1])).exp();
    }
    let g_sup = terminal.sup_norm();

    let mut fields = vec![terminal.clone()];
    let mut coeffs = terminal.spectrum().to_vec();
    for i in (0..last).rev() {
        etd.step(&mut coeffs, |tau_stage, c| {
            let stage = match tau_stage {
                Stage::Start => Stage::End,
                Stage::Mid => Stage::Mid,
                Stage::End => Stage::Start,
            };
            let weights = stage_weights(i, nodes, stage);
            let mu_s = combine(mu.densities(), &weights);
            let n = mu_s.len() as f64;
            let m = v.iter().zip(&mu_s).map(|(a, b)| a * b).sum::<f64>() / n;
            let u = grid.inverse_real(c);
            let pair = u.iter().zip(&mu_s).map(|(a, b)| a * b).sum::<f64>() / n;
            let grad: Vec<Vec<f64>> = (0..dim)
                .map(|axis| {
                    let d: Vec<_> = c
                        .iter()
                        .enumerate()
                        .map(|(idx, x)| grid.derivative_multiplier(idx, axis) * x)
                        .collect();
                    grid.inverse_real(&d)
                })
                .collect();
            Ok(grid.forward_real(&rhs(i, stage, &u, &grad, m, pair)))
        })?;
        let field = ScalarField::new(grid, grid.inverse_real(&coeffs))?;
        let sup = field.sup_norm();
        let bound = growth[i] * g_sup;
        if !sup.is_finite() || sup > 10.0 * bound + 1e-9 {
            return Err(Error::Blowup {
                time: spec.time(i),
                sup,
                bound,
            });
        }
        fields.push(field);
    }
    fields.reverse();
    Ok(AdjointPath {
        times: spec.times()[..=last].to_vec(),
        fields,
    })
}
