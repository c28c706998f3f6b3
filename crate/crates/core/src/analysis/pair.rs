//! Exact two-particle values against the limit at random states.

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::report::{number, Report, ReportMeta};
use super::study::{draw_pair_samples, reduced_config, require_circle};
use crate::error::Result;
use crate::small_n::{compare_to_limit, solve_v2_reduced, FiniteValue, LimitComparison};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub rows: Vec<LimitComparison>,
    pub max_ratio: f64,
    /// `sup_t ‖v²_t‖_∞` over the reduced solve.
    pub value_sup: f64,
    pub delta_max: f64,
    pub seed: u64,
    pub points: usize,
    pub dt: f64,
    pub pair_points: usize,
    pub delta_points: usize,
    pub pair_dt: f64,
    pub sobolev_order: u32,
}

/// Stream offset for the sampled states.
const SAMPLE_STREAM: u64 = 1 << 42;

/// `compare_to_limit` at `pair.samples` states: positions from `μ0`,
/// clocks uniform on `[0, pair.clock_range]`.
pub fn run_pair_comparison(config: &ExperimentConfig) -> Result<PairReport> {
    config.validate()?;
    require_circle(config)?;
    let spec = config.problem()?;
    let mu0 = config.initial_density(spec.grid())?;
    let reduced = reduced_config(config, &spec, vec![spec.t0()]);
    let table = solve_v2_reduced(&spec, &reduced)?;
    let samples = draw_pair_samples(
        &mu0,
        config.pair.samples,
        config.pair.clock_range,
        config.seed,
        SAMPLE_STREAM,
    )?;
    let rows = compare_to_limit(
        &spec,
        FiniteValue::Two(&table),
        &samples,
        &config.picard(),
        config.sobolev(),
    )?;
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(PairReport {
        rows,
        max_ratio,
        value_sup: table.sup_norm(),
        delta_max: reduced.delta_max,
        seed: config.seed,
        points: config.points,
        dt: config.dt,
        pair_points: reduced.points,
        delta_points: reduced.delta_points,
        pair_dt: reduced.dt,
        sobolev_order: config.sobolev().order(),
    })
}

impl PairReport {
    pub fn to_report(&self) -> Report {
        let mut extra = serde_json::Map::new();
        extra.insert("pair_points".into(), self.pair_points.into());
        extra.insert("delta_points".into(), self.delta_points.into());
        extra.insert("delta_max".into(), number(self.delta_max));
        extra.insert("pair_dt".into(), number(self.pair_dt));
        let meta = ReportMeta {
            seed: self.seed,
            dim: 1,
            points: self.points,
            dt: self.dt,
            sobolev_order: self.sobolev_order,
            extra,
        };
        let mut r = Report::new(
            "pair",
            meta,
            &[
                "x1",
                "x2",
                "a1",
                "a2",
                "finite_value",
                "limit_value",
                "gap",
                "rhs",
                "ratio",
                "mollification_distance",
                "picard_converged",
            ],
        );
        for row in &self.rows {
            r.push_row(vec![
                number(row.positions[0]),
                number(row.positions[1]),
                number(row.clocks[0]),
                number(row.clocks[1]),
                number(row.finite_value),
                number(row.limit_value),
                number(row.gap),
                number(row.rhs),
                number(row.ratio),
                number(row.mollification_distance),
                row.picard_converged.into(),
            ]);
        }
        r.summarize("max_ratio", number(self.max_ratio));
        r.summarize("value_sup", number(self.value_sup));
        r
    }
}
