//! Special functions and ODE integration.

pub mod bessel;
pub mod ode;

pub use bessel::{bessel_ik, bessel_jy, BesselIK, BesselJY};
pub use ode::{
    integrate, integrate_checkpointed, CheckpointedSolution, FnSystem, IntegratorSpec, Method, OdeSystem, Trajectory,
};
