//! Deterministic hydrodynamic limits: heat equation, tilted equation and walker ODE.

pub mod solver;
pub mod tridiag;

pub use solver::{evaluate_frame, solve_heat, solve_perturbed, HydroSolution, Scheme, SpaceTimeGrid};
pub use tridiag::CyclicTridiagonal;
