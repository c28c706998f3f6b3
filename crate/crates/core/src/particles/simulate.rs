//! Monte Carlo estimation of the particle cost and of the weighted flow.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ensemble::{stream_rng, ParticleEnsemble};
use super::feedback::Feedback;
use crate::error::{Error, Result};
use crate::mean_field::{fp_forward_solve, ControlPath, ProblemSpec};
use crate::torus::{h_dual_distance, DualNorm, ScalarField, SobolevIndex};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub dt: f64,
    pub replications: usize,
    pub seed: u64,
}

impl SimConfig {
    fn steps(&self, span: f64) -> Result<usize> {
        if !(self.dt > 0.0) || self.replications == 0 {
            return Err(Error::InvalidArgument(
                "simulation needs dt > 0 and at least one replication".into(),
            ));
        }
        let steps = (span / self.dt).round();
        if steps < 1.0 || (steps * self.dt - span).abs() > 1e-9 * span {
            return Err(Error::InvalidArgument(format!(
                "simulation step {} does not divide the horizon length {span}",
                self.dt
            )));
        }
        Ok(steps as usize)
    }
}

/// How each replication's particles start.
#[derive(Debug, Clone)]
pub enum InitialState {
    /// The same positions (flattened) every replication.
    Fixed {
        positions: Vec<f64>,
        clocks: Vec<f64>,
    },
    /// Fresh iid draws from a density every replication.
    Sampled {
        density: ScalarField,
        clocks: Vec<f64>,
    },
}

impl InitialState {
    fn build(&self, dim: usize, t0: f64, seed: u64, rep: u64) -> Result<ParticleEnsemble> {
        let rng = stream_rng(seed, rep);
        match self {
            InitialState::Fixed { positions, clocks } => {
                ParticleEnsemble::new(dim, positions.clone(), clocks.clone(), t0, rng)
            }
            InitialState::Sampled { density, clocks } => {
                ParticleEnsemble::sample(density, clocks.clone(), t0, rng)
            }
        }
    }
}

/// Sample mean of `J^N` over replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostEstimate {
    pub mean: f64,
    /// Sample standard deviation over `√replications` (0 for one replication).
    pub std_error: f64,
    pub replications: usize,
    /// Per-replication costs, in replication order.
    pub samples: Vec<f64>,
}

impl CostEstimate {
    pub fn from_samples(samples: Vec<f64>) -> Self {
        let r = samples.len();
        let mean = samples.iter().sum::<f64>() / r as f64;
        let std_error = if r > 1 {
            let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (r - 1) as f64;
            (var / r as f64).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            std_error,
            replications: r,
            samples,
        }
    }
}

/// `E[∫ Σ (1/N_tⁱ) ½|α_tⁱ|² dt + Σ (1/N_Tⁱ) g(X_Tⁱ)]`.
///
/// The running cost uses left endpoints with the current weights. Each step
/// asserts `1/N_tⁱ ≤ e^{(t−t0) max V} / nⁱ[a0]`.
pub fn simulate_cost_jn(
    spec: &ProblemSpec,
    initial: &InitialState,
    feedback: &Feedback,
    config: &SimConfig,
) -> Result<CostEstimate> {
    let dim = spec.grid().dim();
    feedback.check_dim(dim)?;
    let steps = config.steps(spec.horizon() - spec.t0())?;
    let dt = (spec.horizon() - spec.t0()) / steps as f64;
    let v = spec.potential().evaluator();
    let g = spec.terminal().evaluator();
    let v_max = spec.potential().max();
    let samples = (0..config.replications as u64)
        .into_par_iter()
        .map(|rep| {
            let mut e = initial.build(dim, spec.t0(), config.seed, rep)?;
            let w0 = e.weights();
            let mut cost = 0.0;
            let mut alpha = vec![0.0; dim];
            for step in 0..steps {
                let w = e.weights();
                let growth = (step as f64 * dt * v_max).exp() * (1.0 + 1e-12);
                if let Some(i) = (0..w.len()).find(|&i| w[i] > growth * w0[i]) {
                    return Err(Error::Invariant(format!(
                        "weight of particle {i} exceeds its exponential bound at step {step}"
                    )));
                }
                let slice = feedback.at_time(e.time());
                let mut running = 0.0;
                for (i, wi) in w.iter().enumerate() {
                    slice.eval(e.position(i), &mut alpha);
                    running += wi * 0.5 * alpha.iter().map(|a| a * a).sum::<f64>();
                }
                cost += dt * running;
                e.euler_maruyama_step(feedback, &v, dt);
            }
            let w = e.weights();
            let terminal: f64 = w
                .iter()
                .enumerate()
                .map(|(i, wi)| wi * g.eval(e.position(i)))
                .sum();
            Ok(cost + terminal)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(CostEstimate::from_samples(samples))
}

/// Distance at `T` between the weighted particle measure and the PDE flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepresentationCheck {
    pub particles: usize,
    pub seed: u64,
    pub distance: DualNorm,
}

/// Runs `n` particles from `μ0` (clocks 0) under `alpha` with the PDE time step
/// and compares their weighted empirical measure at `T` with `fp_forward_solve`.
pub fn representation_check(
    spec: &ProblemSpec,
    alpha: &ControlPath,
    mu0: &ScalarField,
    n: usize,
    seed: u64,
    k: SobolevIndex,
) -> Result<RepresentationCheck> {
    let pde = fp_forward_solve(spec, alpha, mu0)?;
    representation_against(spec, alpha, mu0, pde.terminal(), n, seed, k)
}

/// [`representation_check`] against a precomputed terminal density.
pub fn representation_against(
    spec: &ProblemSpec,
    alpha: &ControlPath,
    mu0: &ScalarField,
    terminal: &ScalarField,
    n: usize,
    seed: u64,
    k: SobolevIndex,
) -> Result<RepresentationCheck> {
    let feedback = Feedback::from_control(alpha);
    let v = spec.potential().evaluator();
    let mut e = ParticleEnsemble::sample(mu0, vec![0.0; n], spec.t0(), stream_rng(seed, 0))?;
    for _ in 0..spec.steps() {
        e.euler_maruyama_step(&feedback, &v, spec.dt());
    }
    let distance = h_dual_distance(&e.empirical_measure(), terminal, spec.grid(), k)?;
    Ok(RepresentationCheck {
        particles: n,
        seed,
        distance,
    })
}
