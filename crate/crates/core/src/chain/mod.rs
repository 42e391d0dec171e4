//! The classical reduction of second moments to Markov chains.

pub mod bounds;
pub mod coupling;
pub mod hitting;
pub mod process;
pub mod weight;

pub use bounds::{calibrate_c, coll_lower_bound, coll_upper_bound};
pub use coupling::{coupled_walk, decoupled_step, poissonized_dist, CoupledTrace};
pub use hitting::{cumulative_hitting_time, hitting_time, HittingTime};
pub use process::{coll_exact_chain, coll_exact_curve, coupon_bound, scramble_weight_stats, step_process, PauliString};
pub use weight::{
    box_norm, p_transition, q_transition, star_norm, stationary_p, stationary_q, BirthDeathChain, Flavor,
    WeightDistribution,
};
