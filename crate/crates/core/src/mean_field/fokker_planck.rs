//! The controlled Fokker–Planck flow with nonlocal killing,
//! `∂_t μ − ½Δμ + div(αμ) + (V − ⟨V;μ⟩)μ = 0`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::torus::ScalarField;

use super::etd::Etd4;
use super::paths::{check_mesh, combine, stage_weights, ControlPath, MeasurePath};
use super::problem::ProblemSpec;

/// Node values below this abort the solve as under-resolved.
const NEGATIVITY_LIMIT: f64 = -1e-6;

/// Marches `μ0` forward under the feedback `alpha`.
///
/// Diffusion is integrated exactly in Fourier space; transport and killing
/// are treated explicitly, with `α` interpolated in time at the stages.
/// Mass is preserved by the continuous flow; any drift is removed by
/// renormalizing each step and its maximum is recorded.
pub fn fp_forward_solve(
    spec: &ProblemSpec,
    alpha: &ControlPath,
    mu0: &ScalarField,
) -> Result<MeasurePath> {
    let grid = spec.grid();
    grid.check_same(mu0.grid())?;
    grid.check_same(alpha.grid())?;
    check_mesh(spec, alpha.len())?;
    validate_density(mu0)?;

    let v = spec.potential().values();
    let nodes = spec.steps() + 1;
    let dim = grid.dim();
    let etd = Etd4::diffusion(grid, spec.dt());
    let mut coeffs = mu0.spectrum().to_vec();
    let mut densities = Vec::with_capacity(nodes);
    densities.push(mu0.clone());
    let mut mass_drift: f64 = 0.0;

    // α at every node, per axis, for interpolation
    let per_axis: Vec<Vec<ScalarField>> = (0..dim)
        .map(|axis| (0..nodes).map(|i| alpha.at(i)[axis].clone()).collect())
        .collect();

    for i in 0..spec.steps() {
        etd.step(&mut coeffs, |stage, c| {
            let weights = stage_weights(i, nodes, stage);
            let mu = grid.inverse_real(c);
            let mean_v = v.iter().zip(&mu).map(|(a, b)| a * b).sum::<f64>() / mu.len() as f64;
            let mut out = vec![Complex64::default(); c.len()];
            for (axis, fields) in per_axis.iter().enumerate() {
                let a = combine(fields, &weights);
                let flux: Vec<f64> = a.iter().zip(&mu).map(|(x, y)| x * y).collect();
                for (idx, (o, f)) in out.iter_mut().zip(grid.forward_real(&flux)).enumerate() {
                    *o -= grid.derivative_multiplier(idx, axis) * f;
                }
            }
            let kill: Vec<f64> = v.iter().zip(&mu).map(|(a, b)| (a - mean_v) * b).collect();
            for (o, k) in out.iter_mut().zip(grid.forward_real(&kill)) {
                *o -= k;
            }
            Ok(out)
        })?;

        let t = spec.time(i + 1);
        let mut values = grid.inverse_real(&coeffs);
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        if !min.is_finite() || min < NEGATIVITY_LIMIT {
            return Err(Error::NegativeDensity { min, time: t });
        }
        if min < 0.0 {
            values.iter_mut().for_each(|x| *x = x.max(0.0));
        }
        let mass = values.iter().sum::<f64>() / values.len() as f64;
        mass_drift = mass_drift.max((mass - 1.0).abs());
        values.iter_mut().for_each(|x| *x /= mass);
        let field = ScalarField::new(grid, values)?;
        coeffs = field.spectrum().to_vec();
        densities.push(field);
    }
    Ok(MeasurePath {
        times: spec.times(),
        densities,
        mass_drift,
    })
}

pub(crate) fn validate_density(mu: &ScalarField) -> Result<()> {
    let min = mu.min();
    let mass = mu.mean();
    if !(min >= -1e-10) || !((mass - 1.0).abs() <= 1e-8) {
        return Err(Error::InvalidArgument(format!(
            "initial density must be nonnegative with unit mass (min {min}, mass {mass})"
        )));
    }
    Ok(())
}
