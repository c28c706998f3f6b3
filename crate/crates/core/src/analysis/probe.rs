//! Empirical regularity constants of the value function and of optimal flows.
//!
//! The constants are existential, so the probes report measured ratios and
//! how much they move under refinement; they never assert a specific value.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::report::{number, Report, ReportMeta};
use super::study::require_circle;
use super::wasserstein::{wasserstein1_circle, CircleMeasure};
use crate::error::{Error, Result};
use crate::mean_field::{
    dpp_check, duality_value_identity, fp_forward_solve, mfc_picard_solve, PicardConfig,
    ProblemSpec,
};
use crate::torus::{cole_hopf_hjb, h_dual_distance, ScalarField, TorusGrid};

/// Uniform density plus the `modes` lowest Fourier modes with Gaussian
/// coefficients, rescaled so the perturbation's sup-norm bound equals
/// `amplitude`, clipped at zero and renormalized.
pub fn random_density(
    grid: &TorusGrid,
    modes: usize,
    amplitude: f64,
    rng: &mut ChaCha8Rng,
) -> Result<ScalarField> {
    if grid.dim() != 1 {
        return Err(Error::UnsupportedDimension(grid.dim()));
    }
    let coeffs: Vec<(f64, f64)> = (0..modes)
        .map(|_| (StandardNormal.sample(rng), StandardNormal.sample(rng)))
        .collect();
    let total: f64 = coeffs.iter().map(|(a, b)| a.abs() + b.abs()).sum();
    let s = if total > 0.0 { amplitude / total } else { 0.0 };
    let f = ScalarField::from_fn(grid, |x| {
        1.0 + s * coeffs
            .iter()
            .enumerate()
            .map(|(j, (a, b))| {
                let phase = 2.0 * std::f64::consts::PI * (j + 1) as f64 * x[0];
                a * phase.cos() + b * phase.sin()
            })
            .sum::<f64>()
    });
    let clipped = f.map(|v| v.max(0.0));
    let mass = clipped.mean();
    Ok(clipped.scale(1.0 / mass))
}

/// Maxima over the pair suite at one perturbation size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleProbe {
    pub scale: f64,
    /// `max |𝒱(μ²) − 𝒱(μ¹)| / ‖μ² − μ¹‖_{H^{-k}}`.
    pub lipschitz: f64,
    /// `max [½𝒱(μ¹) + ½𝒱(μ²) − 𝒱(½μ¹ + ½μ²)] / (⅛‖μ² − μ¹‖²_{H^{-k}})`.
    pub semiconcavity: f64,
    /// Same ratio, smallest over the suite.
    pub semiconcavity_min: f64,
}

/// Values and ratios along a time ladder at one time step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeLevel {
    pub dt: f64,
    pub times: Vec<f64>,
    /// `𝒱(t_j, μ0)`.
    pub values: Vec<f64>,
    /// `max |𝒱(t_i) − 𝒱(t_j)| / |t_i − t_j|`.
    pub time_lipschitz: f64,
    /// `max d₁(μ_{t_i}, μ_{t_j}) / |t_i − t_j|^{1/2}` along the optimal flow from `μ0`.
    pub holder: f64,
    /// Largest deviation from `⟨ũ_t; μ0⟩` when `V ≡ 0`.
    pub oracle_error: Option<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeRegularity {
    pub levels: Vec<TimeLevel>,
    /// Relative change of the time-Lipschitz ratio between the last two levels.
    pub time_lipschitz_change: f64,
    pub holder_change: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub pairs: usize,
    pub scales: Vec<ScaleProbe>,
    /// Relative change between the two smallest scales.
    pub lipschitz_change: f64,
    pub semiconcavity_change: f64,
    /// `max sup_t ‖μ¹_t − μ²_t‖ / ‖μ¹_0 − μ²_0‖` under a shared frozen control.
    pub fp_stability: f64,
    pub time: TimeRegularity,
    pub dpp_defect: f64,
    pub duality_defect: f64,
    pub all_converged: bool,
    pub seed: u64,
    pub points: usize,
    pub dt: f64,
    pub sobolev_order: u32,
}

fn relative_change(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn probe_picard(config: &ExperimentConfig) -> PicardConfig {
    PicardConfig {
        tol: config.probe.tol,
        ..config.picard()
    }
}

/// Stream offset for the random density pairs.
const PAIR_STREAM: u64 = 1 << 41;

pub fn regularity_probe(config: &ExperimentConfig) -> Result<ProbeReport> {
    config.validate()?;
    require_circle(config)?;
    let spec = config.problem()?;
    let grid = spec.grid().clone();
    let k = config.sobolev();
    let picard = probe_picard(config);
    let mut all_converged = true;
    let mut solve = |mu: &ScalarField| -> Result<f64> {
        let sol = mfc_picard_solve(&spec, mu, &picard)?;
        all_converged &= sol.converged;
        Ok(sol.value)
    };

    let mut scales: Vec<ScaleProbe> = config
        .probe
        .scales
        .iter()
        .map(|&scale| ScaleProbe {
            scale,
            lipschitz: 0.0,
            semiconcavity: f64::NEG_INFINITY,
            semiconcavity_min: f64::INFINITY,
        })
        .collect();
    let mut fp_stability: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(PAIR_STREAM);
    for _ in 0..config.probe.pairs {
        let mu1 = random_density(&grid, config.probe.modes, config.probe.amplitude, &mut rng)?;
        let mu2 = random_density(&grid, config.probe.modes, config.probe.amplitude, &mut rng)?;
        let eta = mu2.sub(&mu1);
        let v1 = solve(&mu1)?;
        for probe in scales.iter_mut() {
            let s = probe.scale;
            let far = mu1.add(&eta.scale(s));
            let mid = mu1.add(&eta.scale(0.5 * s));
            let dist = h_dual_distance(&mu1, &far, &grid, k)?.value;
            let (lip, semi) = if dist > 0.0 {
                let v2 = solve(&far)?;
                let vm = solve(&mid)?;
                (
                    (v2 - v1).abs() / dist,
                    (0.5 * v1 + 0.5 * v2 - vm) / (0.125 * dist * dist),
                )
            } else {
                (0.0, 0.0)
            };
            probe.lipschitz = probe.lipschitz.max(lip);
            probe.semiconcavity = probe.semiconcavity.max(semi);
            probe.semiconcavity_min = probe.semiconcavity_min.min(semi);
        }
        let base = mfc_picard_solve(&spec, &mu1, &picard)?;
        let f1 = fp_forward_solve(&spec, &base.control, &mu1)?;
        let f2 = fp_forward_solve(&spec, &base.control, &mu2)?;
        let d0 = h_dual_distance(&mu1, &mu2, &grid, k)?.value;
        if d0 > 0.0 {
            fp_stability = fp_stability.max(f1.sup_dual_distance(&f2, k) / d0);
        }
    }
    let n = scales.len();
    let (lipschitz_change, semiconcavity_change) = if n >= 2 {
        (
            relative_change(scales[n - 1].lipschitz, scales[n - 2].lipschitz),
            relative_change(scales[n - 1].semiconcavity, scales[n - 2].semiconcavity),
        )
    } else {
        (0.0, 0.0)
    };

    let mu0 = config.initial_density(&grid)?;
    let base = mfc_picard_solve(&spec, &mu0, &picard)?;
    all_converged &= base.converged;
    let duality_defect = duality_value_identity(&spec, &base).relative;
    let mid = spec.time(spec.steps() / 2);
    let dpp_defect = dpp_check(&spec, &base, mid, &picard)?.relative;
    let time = time_regularity_probe(config)?;
    all_converged &= time.levels.iter().all(|l| l.converged);

    Ok(ProbeReport {
        pairs: config.probe.pairs,
        scales,
        lipschitz_change,
        semiconcavity_change,
        fp_stability,
        time,
        dpp_defect,
        duality_defect,
        all_converged,
        seed: config.seed,
        points: config.points,
        dt: config.dt,
        sobolev_order: k.order(),
    })
}

/// Time ladder at the configured step and at half of it.
pub fn time_regularity_probe(config: &ExperimentConfig) -> Result<TimeRegularity> {
    config.validate()?;
    require_circle(config)?;
    let levels = [config.dt, 0.5 * config.dt]
        .iter()
        .map(|&dt| time_level(config, dt))
        .collect::<Result<Vec<_>>>()?;
    let (a, b) = (&levels[0], &levels[1]);
    Ok(TimeRegularity {
        time_lipschitz_change: relative_change(a.time_lipschitz, b.time_lipschitz),
        holder_change: relative_change(a.holder, b.holder),
        levels,
    })
}

fn time_level(config: &ExperimentConfig, dt: f64) -> Result<TimeLevel> {
    let spec: ProblemSpec = config.problem_with(config.points, dt)?;
    let mu0 = config.initial_density(spec.grid())?;
    let picard = probe_picard(config);
    let rungs = config.probe.ladder;
    let span = spec.horizon() - spec.t0();
    let mut times = Vec::with_capacity(rungs);
    let mut indices = Vec::with_capacity(rungs);
    for j in 0..rungs {
        let t = spec.t0() + span * j as f64 / rungs as f64;
        let i = spec.mesh_index(t).ok_or_else(|| {
            Error::Config(format!(
                "ladder time {t} is not a multiple of the step {dt}"
            ))
        })?;
        times.push(spec.time(i));
        indices.push(i);
    }
    let mut converged = true;
    let mut values = Vec::with_capacity(rungs);
    let mut flow = None;
    for (j, &t) in times.iter().enumerate() {
        let restarted = if j == 0 {
            spec.clone()
        } else {
            spec.restarted_at(t)?
        };
        let sol = mfc_picard_solve(&restarted, &mu0, &picard)?;
        converged &= sol.converged;
        values.push(sol.value);
        if j == 0 {
            flow = Some(sol.measure);
        }
    }
    let flow = flow.expect("ladder has rungs");
    let mut time_lipschitz: f64 = 0.0;
    let mut holder: f64 = 0.0;
    for i in 0..rungs {
        for j in i + 1..rungs {
            let dt_ij = times[j] - times[i];
            time_lipschitz = time_lipschitz.max((values[j] - values[i]).abs() / dt_ij);
            let d1 = wasserstein1_circle(
                CircleMeasure::Density(flow.at(indices[i])),
                CircleMeasure::Density(flow.at(indices[j])),
            )?;
            holder = holder.max(d1 / dt_ij.sqrt());
        }
    }
    let oracle_error = if spec.potential().sup_norm() == 0.0 {
        let mut worst: f64 = 0.0;
        for (t, v) in times.iter().zip(&values) {
            let u = cole_hopf_hjb(spec.terminal(), *t, spec.horizon())?;
            worst = worst.max((u.inner(&mu0) - v).abs());
        }
        Some(worst)
    } else {
        None
    };
    Ok(TimeLevel {
        dt,
        times,
        values,
        time_lipschitz,
        holder,
        oracle_error,
        converged,
    })
}

impl ProbeReport {
    pub fn to_report(&self) -> Report {
        let mut extra = serde_json::Map::new();
        extra.insert("pairs".into(), self.pairs.into());
        let meta = ReportMeta {
            seed: self.seed,
            dim: 1,
            points: self.points,
            dt: self.dt,
            sobolev_order: self.sobolev_order,
            extra,
        };
        let mut r = Report::new(
            "probe",
            meta,
            &["quantity", "parameter", "dt", "points", "value"],
        );
        let mut row = |q: &str, p: f64, dt: f64, v: f64| {
            r.push_row(vec![
                q.into(),
                number(p),
                number(dt),
                self.points.into(),
                number(v),
            ]);
        };
        for s in &self.scales {
            row("lipschitz", s.scale, self.dt, s.lipschitz);
            row("semiconcavity", s.scale, self.dt, s.semiconcavity);
            row("semiconcavity_min", s.scale, self.dt, s.semiconcavity_min);
        }
        row("fp_stability", f64::NAN, self.dt, self.fp_stability);
        for l in &self.time.levels {
            row("time_lipschitz", f64::NAN, l.dt, l.time_lipschitz);
            row("holder_half", f64::NAN, l.dt, l.holder);
        }
        row("dpp_defect", f64::NAN, self.dt, self.dpp_defect);
        row("duality_defect", f64::NAN, self.dt, self.duality_defect);
        r.summarize("lipschitz_change", number(self.lipschitz_change));
        r.summarize("semiconcavity_change", number(self.semiconcavity_change));
        r.summarize(
            "time_lipschitz_change",
            number(self.time.time_lipschitz_change),
        );
        r.summarize("holder_change", number(self.time.holder_change));
        r.summarize("all_converged", self.all_converged);
        r.summarize("time_levels", &self.time.levels);
        r
    }
}
