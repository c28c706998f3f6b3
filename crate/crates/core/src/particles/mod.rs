//! The N-particle system with exponentially weighted killing clocks.

pub mod ensemble;
pub mod feedback;
pub mod simulate;
pub mod weights;

pub use ensemble::{hamiltonian_n, sample_density, stream_rng, ParticleEnsemble};
pub use feedback::Feedback;
pub use simulate::{
    representation_against, representation_check, simulate_cost_jn, CostEstimate, InitialState,
    RepresentationCheck, SimConfig,
};
pub use weights::{weight_norm, weights_from_a};
