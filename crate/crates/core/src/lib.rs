//! Numerical laboratory for second moments of random quantum circuits.
//!
//! The crate is split along the lines of the underlying mathematics:
//!
//! * [`perm`]: exact combinatorics on the symmetric group (distances, Gram
//!   matrices, Weingarten coefficients).
//! * [`gap`]: row/column subspace angles on a square lattice, computed from
//!   Gram matrices and, independently, from explicit vectors.
//! * [`chain`]: the Pauli-string process, its weight chain, the affine
//!   accelerated chain, couplings and collision-probability formulas.
//! * [`spectral`]: Krawtchouk-polynomial solution of the accelerated chain.
//! * [`sim`]: a dense statevector oracle for the circuit ensembles.
//!
//! Every stochastic entry point takes an explicit 64-bit seed; see [`rng`].

pub mod chain;
pub mod error;
pub mod exact;
pub mod gap;
pub mod perm;
pub mod rng;
pub mod sim;
pub mod spectral;
pub mod stats;

pub use error::{LabError, Result};
