//! Finite-`N` values against the mean-field value of the weighted empirical measure.

use serde::{Deserialize, Serialize};

use super::reduced::ValueTable2;
use crate::error::{Error, Result};
use crate::mean_field::{mfc_picard_solve, PicardConfig, ProblemSpec};
use crate::particles::{weight_norm, weights_from_a};
use crate::torus::{cole_hopf_hjb, default_bandwidth, mollify_atoms, AtomicMeasure, SobolevIndex};

/// Which finite-population value to compare.
#[derive(Debug, Clone, Copy)]
pub enum FiniteValue<'a> {
    /// `v¹`, computed on the fly from the terminal cost.
    One,
    /// `v²` from a reduced table holding a snapshot at `spec.t0()`.
    Two(&'a ValueTable2),
}

impl FiniteValue<'_> {
    pub fn particles(&self) -> usize {
        match self {
            FiniteValue::One => 1,
            FiniteValue::Two(_) => 2,
        }
    }
}

/// One state `(x, a)` with `N` positions and `N` clocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSample {
    pub positions: Vec<f64>,
    pub clocks: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitComparison {
    pub particles: usize,
    pub positions: Vec<f64>,
    pub clocks: Vec<f64>,
    pub finite_value: f64,
    pub limit_value: f64,
    pub gap: f64,
    /// `(Σ (1/nⁱ)²)^{1/2}`.
    pub rhs: f64,
    pub ratio: f64,
    /// `H^{-k}` distance between the atoms and their mollification.
    pub mollification_distance: f64,
    pub picard_converged: bool,
}

/// Compares `v^N(t0, x, a)` with `𝒱(t0, Σ (1/nⁱ) δ_{xⁱ})` at each sample.
///
/// The atoms are mollified on `spec.grid()` with bandwidth `4h²` before the
/// mean-field solve; the distance this introduces is reported per row.
pub fn compare_to_limit(
    spec: &ProblemSpec,
    finite: FiniteValue<'_>,
    samples: &[LimitSample],
    config: &PicardConfig,
    k: SobolevIndex,
) -> Result<Vec<LimitComparison>> {
    if spec.grid().dim() != 1 {
        return Err(Error::UnsupportedDimension(spec.grid().dim()));
    }
    let n = finite.particles();
    let v1 = match finite {
        FiniteValue::One => {
            Some(cole_hopf_hjb(spec.terminal(), spec.t0(), spec.horizon())?.evaluator())
        }
        FiniteValue::Two(_) => None,
    };
    let eps = default_bandwidth(spec.grid());
    let mut rows = Vec::with_capacity(samples.len());
    for s in samples {
        if s.positions.len() != n || s.clocks.len() != n {
            return Err(Error::InvalidArgument(format!(
                "sample needs {n} positions and {n} clocks"
            )));
        }
        let finite_value = match finite {
            FiniteValue::One => v1.as_ref().expect("set above").eval(&s.positions),
            FiniteValue::Two(table) => table.evaluate(
                spec.t0(),
                [s.positions[0], s.positions[1]],
                [s.clocks[0], s.clocks[1]],
            )?,
        };
        let weights = weights_from_a(&s.clocks);
        let rhs = weight_norm(&weights);
        let atoms = AtomicMeasure::new(1, s.positions.clone(), weights)?;
        let mollified = mollify_atoms(&atoms, eps, spec.grid(), k)?;
        let sol = mfc_picard_solve(spec, &mollified.density, config)?;
        let gap = (finite_value - sol.value).abs();
        rows.push(LimitComparison {
            particles: n,
            positions: s.positions.clone(),
            clocks: s.clocks.clone(),
            finite_value,
            limit_value: sol.value,
            gap,
            rhs,
            ratio: gap / rhs,
            mollification_distance: mollified.distance.upper(),
            picard_converged: sol.converged,
        });
    }
    Ok(rows)
}
