//! The one-particle value function.
//!
//! With a single particle the weight is identically 1, so the clock drops
//! out and `v¹` solves the plain viscous HJB: `v¹_t = −log P_{T−t} e^{−g}`,
//! independent of `V` and of `a`.

use crate::error::Result;
use crate::mean_field::ProblemSpec;
use crate::torus::{cole_hopf_hjb, ScalarField};

/// `v¹` at every mesh node of `spec`.
pub fn solve_v1(spec: &ProblemSpec) -> Result<Vec<ScalarField>> {
    spec.times()
        .into_iter()
        .map(|t| cole_hopf_hjb(spec.terminal(), t, spec.horizon()))
        .collect()
}
