//! Spectral calculus on the periodic grid `[0,1)^d`.

pub mod atomic;
pub mod cole_hopf;
pub mod field;
pub mod grid;
pub mod sobolev;

pub use atomic::{default_bandwidth, mollify_atoms, AtomicMeasure, Mollified};
pub use cole_hopf::cole_hopf_hjb;
pub use field::{divergence, BandLimited, ScalarField};
pub use grid::TorusGrid;
pub use sobolev::{h_dual_distance, h_dual_norm, h_norm, DualNorm, MeasureSpectrum, SobolevIndex};
