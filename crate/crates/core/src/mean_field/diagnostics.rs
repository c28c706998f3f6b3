//! Cost evaluation and consistency checks on solutions of the coupled system.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::torus::ScalarField;

use super::paths::{ControlPath, MeasurePath};
use super::picard::{mfc_picard_solve, MFCSolution, PicardConfig};
use super::problem::{ProblemSpec, Radius};

/// `∫ ½|α_t|² dμ_t` at every mesh node.
pub fn running_cost_density(mu: &MeasurePath, alpha: &ControlPath) -> Vec<f64> {
    (0..mu.len())
        .map(|i| alpha.kinetic_density(i).inner(mu.at(i)))
        .collect()
}

/// `∫_{t0}^T ∫ ½|α|² dμ_t dt + ∫ g dμ_T`, grid mean in space and [`time_integral`] in time.
pub fn cost_functional(spec: &ProblemSpec, mu: &MeasurePath, alpha: &ControlPath) -> f64 {
    let running = running_cost_density(mu, alpha);
    time_integral(&running, spec.dt()) + mu.terminal().inner(spec.terminal())
}

/// End weights of the fourth-order extended trapezoid rule.
const GREGORY: [f64; 4] = [17.0 / 48.0, 59.0 / 48.0, 43.0 / 48.0, 49.0 / 48.0];

/// Integral of equally spaced samples.
///
/// Trapezoid weights with fourth-order end corrections from 8 nodes on;
/// Simpson or plain trapezoid for shorter runs.
pub fn time_integral(values: &[f64], dt: f64) -> f64 {
    let n = values.len();
    match n {
        0 | 1 => 0.0,
        _ if n >= 8 => {
            let interior: f64 = values[4..n - 4].iter().sum();
            let ends: f64 = GREGORY
                .iter()
                .enumerate()
                .map(|(j, w)| w * (values[j] + values[n - 1 - j]))
                .sum();
            dt * (interior + ends)
        }
        _ if n % 2 == 1 => {
            let odd: f64 = values[1..n - 1].iter().step_by(2).sum();
            let even: f64 = values[2..n - 1].iter().step_by(2).sum();
            dt / 3.0 * (values[0] + values[n - 1] + 4.0 * odd + 2.0 * even)
        }
        _ => dt * (0.5 * (values[0] + values[n - 1]) + values[1..n - 1].iter().sum::<f64>()),
    }
}

/// Both sides of `𝒱 = ⟨u_{t0};μ0⟩ − ∫ ⟨V;μ_t⟩⟨u_t;μ_t⟩ dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualityDefect {
    pub value: f64,
    pub dual_side: f64,
    pub absolute: f64,
    /// `absolute / max(|value|, 1e−12)`.
    pub relative: f64,
}

pub fn duality_value_identity(spec: &ProblemSpec, sol: &MFCSolution) -> DualityDefect {
    let mu = &sol.measure;
    let mean_v = mu.pair_with(spec.potential());
    let source: Vec<f64> = (0..mu.len())
        .map(|i| mean_v[i] * sol.adjoint.at(i).inner(mu.at(i)))
        .collect();
    let dual_side = sol.adjoint.initial().inner(mu.initial()) - time_integral(&source, spec.dt());
    defect(sol.value, dual_side)
}

fn defect(value: f64, other: f64) -> DualityDefect {
    let absolute = (value - other).abs();
    DualityDefect {
        value,
        dual_side: other,
        absolute,
        relative: absolute / value.abs().max(1e-12),
    }
}

/// Outcome of restarting the solve at an intermediate time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DppCheck {
    /// `𝒱(t0, μ0)`.
    pub value: f64,
    /// `∫_{t0}^{t1}` running cost along the optimal flow.
    pub running: f64,
    /// `𝒱(t1, μ_{t1})` from a fresh solve.
    pub continuation: f64,
    pub absolute: f64,
    pub relative: f64,
}

/// Compares `𝒱(t0,μ0)` with the running cost up to `t1` plus `𝒱(t1, μ_{t1})`.
///
/// `t1 = t0` gives zero by construction; `t1 = T` uses `⟨g;μ_T⟩` for the continuation.
pub fn dpp_check(
    spec: &ProblemSpec,
    sol: &MFCSolution,
    t1: f64,
    config: &PicardConfig,
) -> Result<DppCheck> {
    let i1 = spec
        .mesh_index(t1)
        .ok_or_else(|| Error::InvalidArgument(format!("restart time {t1} is not a mesh node")))?;
    let running_all = running_cost_density(&sol.measure, &sol.control);
    let running = time_integral(&running_all[..=i1], spec.dt());
    let continuation = if i1 == 0 {
        sol.value
    } else if i1 == spec.steps() {
        sol.measure.terminal().inner(spec.terminal())
    } else {
        let restarted = spec.restarted_at(t1)?;
        let later = mfc_picard_solve(&restarted, sol.measure.at(i1), config)?;
        if !later.converged {
            return Err(Error::NotConverged {
                iterations: later.iterations,
                residual: later.residual,
            });
        }
        later.value
    };
    let d = defect(sol.value, running + continuation);
    Ok(DppCheck {
        value: sol.value,
        running,
        continuation,
        absolute: d.absolute,
        relative: d.relative,
    })
}

/// `max_t (‖u_t‖_∞ − e^{(T−t) max V} ‖g‖_∞)`; nonpositive when the a priori bound holds.
pub fn apriori_excess(spec: &ProblemSpec, sol: &MFCSolution) -> f64 {
    let v_max = spec.potential().max();
    let g_sup = spec.terminal().sup_norm();
    sol.adjoint
        .fields()
        .iter()
        .enumerate()
        .map(|(i, u)| u.sup_norm() - ((spec.horizon() - spec.time(i)) * v_max).exp() * g_sup)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Result of re-solving with a larger truncation radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusStability {
    pub radius: f64,
    /// `sup_t ‖∇u_t‖_∞` of the reference solve.
    pub sup_gradient: f64,
    /// Largest difference in `u`, in `μ` (sup-norm) and in the value.
    pub adjoint_change: f64,
    pub measure_change: f64,
    pub value_change: f64,
}

/// Re-solves with radius `2R` and with `R = ∞` and reports the largest change.
///
/// When `R` exceeds the gradients actually met, the truncation is inactive and
/// all three solves run through identical arithmetic.
pub fn radius_stability(
    spec: &ProblemSpec,
    mu0: &ScalarField,
    config: &PicardConfig,
    reference: &MFCSolution,
) -> Result<RadiusStability> {
    let r = spec.radius().value();
    let mut stab = RadiusStability {
        radius: r,
        sup_gradient: reference.adjoint.sup_gradient(),
        adjoint_change: 0.0,
        measure_change: 0.0,
        value_change: 0.0,
    };
    let mut radii = vec![Radius::Infinite];
    if r.is_finite() {
        radii.insert(0, Radius::Finite(2.0 * r));
    }
    for radius in radii {
        let other = mfc_picard_solve(&spec.clone().with_radius(radius)?, mu0, config)?;
        stab.adjoint_change = stab
            .adjoint_change
            .max(reference.adjoint.sup_distance(&other.adjoint));
        let dmu = reference
            .measure
            .densities()
            .iter()
            .zip(other.measure.densities())
            .map(|(a, b)| a.sub(b).sup_norm())
            .fold(0.0, f64::max);
        stab.measure_change = stab.measure_change.max(dmu);
        stab.value_change = stab.value_change.max((reference.value - other.value).abs());
    }
    Ok(stab)
}
