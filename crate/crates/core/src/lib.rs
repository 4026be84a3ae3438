//! Numerical laboratory for the smoothing property of uniformly parabolic
//! equations `∂ₜu − ∇·(D(x)∇u) = f(x)` on the periodic torus.
//!
//! * [`grid_spectral`]: grids, transforms, multi-index Sobolev seminorms.
//! * [`problem`]: diffusion fields with certified ellipticity, forcing and
//!   initial data, including rough power-law data in `L² \ H¹`.
//! * [`evolution`]: pseudospectral solver with exact, exponential-splitting
//!   and RK4 integrators.
//! * [`galerkin`]: dense Galerkin oracle and closed-form heat solutions.
//! * [`monitor`]: norm series, energy functionals, rate fits and checks of
//!   the smoothing, dissipation, Gronwall, continuity and uniqueness bounds.
//! * [`experiment`]: config files, the experiment runner and verification
//!   suites.

pub mod error;
pub mod experiment;
pub mod evolution;
pub mod galerkin;
pub mod grid_spectral;
pub mod monitor;
pub mod par;
pub mod problem;
pub mod summation;

pub use error::{Error, Result};
pub use evolution::{solve, Method, Trajectory};
pub use grid_spectral::{GridSpec, ScalarField};
pub use problem::{DiffusionField, DiffusionModel, ProblemSpec};
