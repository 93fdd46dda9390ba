//! Work extraction by an N-particle quantum Szilard engine in a 1-D
//! infinite well.
//!
//! A wall is inserted at `l`, the number `m` of particles on its left is
//! measured, the wall is moved quasi-statically to `x_m` and removed. The
//! crate computes the extracted work
//! `W = -k_B T sum_m f_m(l) ln[f_m(l) / f_m(x_m)]`, the force-balance
//! stopping points `x_m^0` and the optimal points `x_m^op` where the
//! forward force equals the outcome-averaged backward force.
//!
//! Lengths are measured in units of the box length `L` and energies in
//! units of `E0`, the single-particle ground-state energy of the full box.

pub mod engine;
pub mod error;
pub mod forces;
pub mod logscale;
pub mod model;
pub mod oracle;
pub mod partition;
pub mod spectrum;
pub mod validate;

pub use engine::{
    balance_protocol, l_extremum_residual, optimal_insertion, optimal_protocol,
    protocol_with_points, sweep_temperature, sweep_wall, total_work, OneSidedStop, Protocol,
    ProtocolSelector, ProtocolSolution, SweepRow, Work,
};
pub use error::{Error, Result};
pub use forces::{
    backward_force, classical_average_force, classical_balance_point, classical_outcome_force,
    classical_outcome_weight, force_sample, forward_force, forward_forces, solve_balance,
    solve_optimal, stopping_points, ForceSample, StoppingPoints,
};
pub use logscale::LogScaledValue;
pub use model::{EngineModel, Tolerances};
pub use partition::{
    canonical_partition, log_fraction_derivative, single_particle_sum, split_partition,
    SplitPartition, Statistics,
};
pub use spectrum::{
    level_energy, level_energy_derivative, truncation_level, BoxGeometry, SubBox, TruncationPolicy,
};
