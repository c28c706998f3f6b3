//! Weighted ("soft-killing") particle control and its mean-field limit on the torus.
//!
//! * [`torus`]: grids, spectral fields, Sobolev norms, atomic measures.
//! * [`mean_field`]: the nonlocal Fokker–Planck / HJB system and its fixed point.
//! * [`particles`]: the N-particle system with exponential weights.
//! * [`small_n`]: exact value functions for one and two particles.
//! * [`analysis`]: studies, probes and report emission.

// `!(x > 0.0)` is the intended way to also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod mean_field;
pub mod particles;
pub mod small_n;
pub mod torus;

pub use error::{Error, Result};
pub use mean_field::{mfc_picard_solve, MFCSolution, PicardConfig, ProblemSpec, Radius};
pub use torus::{AtomicMeasure, ScalarField, SobolevIndex, TorusGrid};
