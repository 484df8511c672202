//! Second-order perturbations: quadratic sources, evolution, constraints and
//! late-time constants.

pub mod asymptotics;
pub mod bilinear;
pub mod evolve;
pub mod pointwise;
pub mod sources;
