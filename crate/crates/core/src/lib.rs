//! Space-homogeneous multi-species BGK moment equations with hard-sphere,
//! temperature-dependent collision frequencies.
//!
//! Units are SI throughout and temperatures are energies in joules
//! (multiply Kelvin by [`BOLTZMANN`]).

pub mod collision;
pub mod dynamics;
pub mod equilibrium;
pub mod error;
pub mod integrate;
pub mod linalg;
pub mod species;
pub mod verify;

pub use collision::{assemble, CollisionMatrices, FrequencyModel};
pub use dynamics::{evaluate, scaled_operators, RhsEvaluation, ScaledOperators};
pub use equilibrium::{
    conservative_decay_rate, decay_envelopes, eigen_bounds, steady_state, DecayConstants,
    Envelopes, EquilibriumData, SpectralBounds,
};
pub use error::{Error, Result};
pub use integrate::{
    backward_euler_step, rk4_step, simulate, suggest_step, IntegratorConfig, Method, MonitorReport,
    Trajectory,
};
pub use linalg::symmetric_eigenvalues;
pub use species::{
    energy_to_kelvin, is_realizable, kelvin_to_energy, temperatures_of, MixtureComposition,
    MomentState, SpeciesParams, BOLTZMANN,
};
pub use verify::{verify, VerificationReport};
