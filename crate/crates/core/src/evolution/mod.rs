//! Pseudospectral solver for `∂ₜu − ∇·(D∇u) = f` on the torus.

mod operator;
mod phi;
mod solver;

pub use operator::{apply_operator, cfl_step_size};
pub(crate) use operator::DivergenceForm;
pub use phi::{phi1, phi_functions};
pub use solver::{
    mass_balance, solve, solve_with_safety, IntegratorStats, Method, Trajectory,
};
