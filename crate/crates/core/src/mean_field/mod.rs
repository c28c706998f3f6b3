//! The limiting problem: nonlocal Fokker–Planck flow, backward HJB, and their fixed point.

pub mod diagnostics;
pub mod etd;
pub mod fokker_planck;
pub mod hamiltonian;
pub mod hjb;
pub mod paths;
pub mod picard;
pub mod problem;

pub use diagnostics::{
    apriori_excess, cost_functional, dpp_check, duality_value_identity, radius_stability,
    running_cost_density, time_integral, DppCheck, DualityDefect, RadiusStability,
};
pub use etd::Stage;
pub use fokker_planck::fp_forward_solve;
pub use hamiltonian::hamiltonian_hr;
pub use hjb::{hjb_backward_solve, linearized_backward_solve};
pub use paths::{AdjointPath, ControlPath, MeasurePath};
pub use picard::{mfc_picard_solve, MFCSolution, PicardConfig};
pub use problem::{ProblemSpec, Radius};
