//! Damped fixed-point iteration for the coupled forward–backward system.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::torus::{ScalarField, SobolevIndex};

use super::diagnostics::cost_functional;
use super::fokker_planck::{fp_forward_solve, validate_density};
use super::hjb::hjb_backward_solve;
use super::paths::{AdjointPath, ControlPath, MeasurePath};
use super::problem::ProblemSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PicardConfig {
    /// Stop once `sup_t‖u^m − u^{m−1}‖_∞ + sup_t‖μ^{m+1} − μ^m‖_{H^{-k}}` falls below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Weight `θ` of the new flow in `μ ← (1−θ)μ + θ μ_new`.
    pub damping: f64,
    /// Order of the dual norm in the residual; the dimension default if absent.
    pub sobolev: Option<SobolevIndex>,
}

impl Default for PicardConfig {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_iter: 500,
            damping: 0.5,
            sobolev: None,
        }
    }
}

/// Iteration after which a growing residual switches to `θ_m = 1/(m+1)`.
const FALLBACK_AFTER: usize = 3;

/// The (approximate) optimal flow, adjoint, feedback and value.
#[derive(Debug, Clone)]
pub struct MFCSolution {
    pub measure: MeasurePath,
    pub adjoint: AdjointPath,
    pub control: ControlPath,
    /// `𝒱(t0, μ0)`, the cost of the returned flow and feedback.
    pub value: f64,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    /// Whether the `1/(m+1)` averaging had to be engaged.
    pub fallback_engaged: bool,
    pub residual_history: Vec<f64>,
}

/// Alternates backward HJB and forward FP solves until self-consistent.
///
/// Starts from the uncontrolled flow. A non-converged run returns the
/// iterate with the smallest residual, with `converged = false`.
pub fn mfc_picard_solve(
    spec: &ProblemSpec,
    mu0: &ScalarField,
    config: &PicardConfig,
) -> Result<MFCSolution> {
    validate_density(mu0)?;
    let k = config
        .sobolev
        .unwrap_or_else(|| SobolevIndex::default_for_dim(spec.grid().dim()));
    let mut mu = fp_forward_solve(spec, &ControlPath::zero(spec), mu0)?;
    let mut previous_u: Option<AdjointPath> = None;
    let mut history = Vec::new();
    let mut best: Option<(f64, MeasurePath, AdjointPath, ControlPath)> = None;
    let mut averaging = false;

    for m in 1..=config.max_iter {
        let u = hjb_backward_solve(spec, &mu)?;
        let alpha = ControlPath::from_adjoint(&u, spec.radius());
        let mu_new = fp_forward_solve(spec, &alpha, mu0)?;
        let theta = if averaging {
            1.0 / (m as f64 + 1.0)
        } else {
            config.damping
        };
        let du = previous_u
            .as_ref()
            .map_or(f64::INFINITY, |p| p.sup_distance(&u));
        let dmu = theta * mu.sup_dual_distance(&mu_new, k);
        let residual = du + dmu;
        if !averaging && m > FALLBACK_AFTER && history.last().is_some_and(|&r| residual > r) {
            averaging = true;
        }
        history.push(residual);

        let improved = best.as_ref().is_none_or(|(r, ..)| residual < *r);
        let done = residual < config.tol;
        if improved || done {
            best = Some((residual, mu_new.clone(), u.clone(), alpha));
        }
        if done {
            break;
        }
        mu = mu.blend(&mu_new, theta);
        previous_u = Some(u);
    }

    let (residual, measure, adjoint, control) = best.expect("at least one iteration runs");
    let value = cost_functional(spec, &measure, &control);
    Ok(MFCSolution {
        measure,
        adjoint,
        control,
        value,
        iterations: history.len(),
        residual,
        converged: residual < config.tol,
        fallback_engaged: averaging,
        residual_history: history,
    })
}
