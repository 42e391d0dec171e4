//! Dense statevector simulation of random circuit ensembles.

pub mod ensemble;
pub mod estimators;
pub mod haar;
pub mod state;

pub use ensemble::{sample_circuit, CircuitRealization, EnsembleKind, EnsembleName, EnsembleSpec, GateEvent};
pub use estimators::{
    anticoncentration_fraction, collision, mc_anticoncentration_curve, mc_collision_curve, mc_expected_collision, monomial_estimate,
    scrambling_check, CollisionCurve, MonomialEstimate, ScrambleReport,
};
pub use haar::{haar_u4, haar_unitary};
pub use state::Statevector;
