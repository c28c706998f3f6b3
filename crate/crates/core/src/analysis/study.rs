//! Particle cost against the mean-field value as the population grows.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, FeedbackKind};
use super::report::{number, Report, ReportMeta};
use super::stats::{weighted_line_fit, SlopeFit};
use crate::error::{Error, Result};
use crate::mean_field::{mfc_picard_solve, MFCSolution, ProblemSpec};
use crate::particles::{
    sample_density, simulate_cost_jn, stream_rng, weight_norm, weights_from_a, Feedback,
    InitialState, SimConfig,
};
use crate::small_n::{
    compare_to_limit, solve_v2_reduced, FiniteValue, LimitComparison, LimitSample, ReducedConfig,
};
use crate::torus::ScalarField;

/// One population size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub particles: usize,
    pub replications: usize,
    pub seed: u64,
    /// Sample mean of `J^N`.
    pub cost: f64,
    pub std_error: f64,
    pub limit_value: f64,
    /// `|Ĵ^N − 𝒱(t0, μ0)|`.
    pub gap: f64,
    /// `(mean_r (J^N_r − 𝒱)²)^{1/2}`, the typical per-draw deviation.
    pub rms_gap: f64,
    /// Standard error of `rms_gap` by the delta method.
    pub rms_std_error: f64,
    /// `(Σ (1/nⁱ[a0])²)^{1/2}`.
    pub rhs: f64,
    /// Whether `rms_gap ≤ 3·SE + C/√N` with the fitted `C`.
    pub within_bound: bool,
    pub ok: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// Fit of `log rms_gap` on `log N`; absent with fewer than four good rows.
    pub fit: Option<SlopeFit>,
    /// Geometric mean of `rms_gap·√N`.
    pub constant: Option<f64>,
    pub limit_value: f64,
    pub picard_converged: bool,
    pub picard_iterations: usize,
    /// Exact two-particle comparisons at states drawn from `μ0`.
    pub exact_pair: Vec<LimitComparison>,
    pub exact_pair_error: Option<String>,
    pub seed: u64,
    pub points: usize,
    pub dt: f64,
    pub particle_dt: f64,
    pub sobolev_order: u32,
}

/// Seed of the replication streams at population size `n`.
pub fn study_seed(seed: u64, n: usize) -> u64 {
    seed ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

pub fn run_convergence_study(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    config.validate()?;
    let spec = config.problem()?;
    let mu0 = config.initial_density(spec.grid())?;
    let sol = mfc_picard_solve(&spec, &mu0, &config.picard())?;
    let feedback = match config.particles.feedback {
        FeedbackKind::MeanField => Feedback::from_control(&sol.control),
        FeedbackKind::Zero => Feedback::Zero,
    };
    let value = sol.value;
    let mut rows: Vec<ConvergenceRow> = config
        .particles
        .counts
        .iter()
        .map(|&n| sweep_row(config, &spec, &mu0, &feedback, value, n))
        .collect();

    let good: Vec<&ConvergenceRow> = rows.iter().filter(|r| r.ok && r.rms_gap > 0.0).collect();
    let fit = if good.len() >= 4 {
        let x: Vec<f64> = good.iter().map(|r| (r.particles as f64).ln()).collect();
        let y: Vec<f64> = good.iter().map(|r| r.rms_gap.ln()).collect();
        let s: Vec<f64> = good
            .iter()
            .map(|r| (r.rms_std_error / r.rms_gap).max(1e-12))
            .collect();
        weighted_line_fit(&x, &y, &s)
    } else {
        None
    };
    let constant = (!good.is_empty()).then(|| {
        let logs: f64 = good
            .iter()
            .map(|r| (r.rms_gap * (r.particles as f64).sqrt()).ln())
            .sum();
        (logs / good.len() as f64).exp()
    });
    if let Some(c) = constant {
        for r in rows.iter_mut().filter(|r| r.ok) {
            r.within_bound = r.rms_gap <= 3.0 * r.std_error + c / (r.particles as f64).sqrt();
        }
    }

    let (exact_pair, exact_pair_error) = if config.pair.exact_row && config.dim == 1 {
        match exact_pair_rows(config, &spec, &mu0) {
            Ok(rows) => (rows, None),
            Err(e) => (Vec::new(), Some(e.to_string())),
        }
    } else {
        (Vec::new(), None)
    };

    Ok(ConvergenceReport {
        rows,
        fit,
        constant,
        limit_value: value,
        picard_converged: sol.converged,
        picard_iterations: sol.iterations,
        exact_pair,
        exact_pair_error,
        seed: config.seed,
        points: config.points,
        dt: config.dt,
        particle_dt: config.particle_dt(),
        sobolev_order: config.sobolev().order(),
    })
}

fn sweep_row(
    config: &ExperimentConfig,
    spec: &ProblemSpec,
    mu0: &ScalarField,
    feedback: &Feedback,
    value: f64,
    n: usize,
) -> ConvergenceRow {
    let clocks = config.clocks(n);
    let rhs = weight_norm(&weights_from_a(&clocks));
    let seed = study_seed(config.seed, n);
    let sim = SimConfig {
        dt: config.particle_dt(),
        replications: config.particles.replications,
        seed,
    };
    let initial = InitialState::Sampled {
        density: mu0.clone(),
        clocks,
    };
    let mut row = ConvergenceRow {
        particles: n,
        replications: sim.replications,
        seed,
        cost: f64::NAN,
        std_error: f64::NAN,
        limit_value: value,
        gap: f64::NAN,
        rms_gap: f64::NAN,
        rms_std_error: f64::NAN,
        rhs,
        within_bound: false,
        ok: false,
        error: None,
    };
    match simulate_cost_jn(spec, &initial, feedback, &sim) {
        Ok(est) => {
            let sq: Vec<f64> = est.samples.iter().map(|j| (j - value).powi(2)).collect();
            let r = sq.len() as f64;
            let m = sq.iter().sum::<f64>() / r;
            let var = if sq.len() > 1 {
                sq.iter().map(|s| (s - m).powi(2)).sum::<f64>() / (r - 1.0)
            } else {
                0.0
            };
            row.cost = est.mean;
            row.std_error = est.std_error;
            row.gap = (est.mean - value).abs();
            row.rms_gap = m.sqrt();
            row.rms_std_error = if m > 0.0 {
                (var / r).sqrt() / (2.0 * m.sqrt())
            } else {
                0.0
            };
            row.ok = true;
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Clock-difference half-width that keeps characteristics from sampled states inside.
pub fn default_delta_max(config: &ExperimentConfig, spec: &ProblemSpec) -> f64 {
    let v = spec.potential();
    let spread = (spec.horizon() - spec.t0()) * (v.max() - v.min());
    config.pair.clock_range + spread + 0.25
}

pub(crate) fn reduced_config(
    config: &ExperimentConfig,
    spec: &ProblemSpec,
    snapshots: Vec<f64>,
) -> ReducedConfig {
    ReducedConfig {
        points: config.pair.points,
        delta_points: config.pair.delta_points,
        delta_max: config
            .pair
            .delta_max
            .unwrap_or_else(|| default_delta_max(config, spec)),
        dt: config.pair.dt,
        snapshots,
    }
}

/// `count` two-particle states: positions from `μ0`, clocks uniform on `[0, clock_range]`.
pub fn draw_pair_samples(
    mu0: &ScalarField,
    count: usize,
    clock_range: f64,
    seed: u64,
    stream: u64,
) -> Result<Vec<LimitSample>> {
    let mut rng = stream_rng(seed, stream);
    (0..count)
        .map(|_| {
            let positions = sample_density(mu0, 2, &mut rng)?;
            let clocks = vec![
                clock_range * rng.random::<f64>(),
                clock_range * rng.random::<f64>(),
            ];
            Ok(LimitSample { positions, clocks })
        })
        .collect()
}

const PAIR_STREAM: u64 = 1 << 40;

fn exact_pair_rows(
    config: &ExperimentConfig,
    spec: &ProblemSpec,
    mu0: &ScalarField,
) -> Result<Vec<LimitComparison>> {
    let table = solve_v2_reduced(spec, &reduced_config(config, spec, vec![spec.t0()]))?;
    let samples = draw_pair_samples(
        mu0,
        config.pair.samples.min(4),
        config.pair.clock_range,
        config.seed,
        PAIR_STREAM,
    )?;
    compare_to_limit(
        spec,
        FiniteValue::Two(&table),
        &samples,
        &config.picard(),
        config.sobolev(),
    )
}

impl ConvergenceReport {
    pub fn to_report(&self) -> Report {
        let mut extra = serde_json::Map::new();
        extra.insert("particle_dt".into(), number(self.particle_dt));
        extra.insert(
            "replications".into(),
            self.rows.first().map_or(0, |r| r.replications).into(),
        );
        let meta = ReportMeta {
            seed: self.seed,
            dim: 1,
            points: self.points,
            dt: self.dt,
            sobolev_order: self.sobolev_order,
            extra,
        };
        let mut r = Report::new(
            "convergence",
            meta,
            &[
                "particles",
                "replications",
                "seed",
                "cost",
                "std_error",
                "limit_value",
                "gap",
                "rms_gap",
                "rms_std_error",
                "rhs",
                "within_bound",
                "ok",
                "error",
            ],
        );
        for row in &self.rows {
            r.push_row(vec![
                row.particles.into(),
                row.replications.into(),
                row.seed.into(),
                number(row.cost),
                number(row.std_error),
                number(row.limit_value),
                number(row.gap),
                number(row.rms_gap),
                number(row.rms_std_error),
                number(row.rhs),
                row.within_bound.into(),
                row.ok.into(),
                row.error.clone().into(),
            ]);
        }
        r.summarize("fit", self.fit);
        r.summarize("constant", self.constant.map(number));
        r.summarize("limit_value", number(self.limit_value));
        r.summarize("picard_converged", self.picard_converged);
        r.summarize("picard_iterations", self.picard_iterations);
        r.summarize("exact_pair", &self.exact_pair);
        r.summarize("exact_pair_error", &self.exact_pair_error);
        r
    }

    /// `(N, rms_gap)` for the rows that ran.
    pub fn gap_points(&self) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter(|r| r.ok)
            .map(|r| (r.particles as f64, r.rms_gap))
            .collect()
    }
}

/// Solves the limit problem once with the configured settings.
pub fn solve_configured(
    config: &ExperimentConfig,
) -> Result<(ProblemSpec, ScalarField, MFCSolution)> {
    let spec = config.problem()?;
    let mu0 = config.initial_density(spec.grid())?;
    let sol = mfc_picard_solve(&spec, &mu0, &config.picard())?;
    Ok((spec, mu0, sol))
}

pub(crate) fn require_circle(config: &ExperimentConfig) -> Result<()> {
    if config.dim != 1 {
        return Err(Error::UnsupportedDimension(config.dim));
    }
    Ok(())
}
