//! Exact value functions for one and two particles on the circle.

pub mod compare;
pub mod reduced;
pub mod unreduced;
pub mod v1;

pub use compare::{compare_to_limit, FiniteValue, LimitComparison, LimitSample};
pub use reduced::{pair_weights, reduced_residual, solve_v2_reduced, ReducedConfig, ValueTable2};
pub use unreduced::{solve_v2_unreduced, UnreducedTable};
pub use v1::solve_v1;
