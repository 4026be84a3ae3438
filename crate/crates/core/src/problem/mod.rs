//! Problem instances: diffusion fields with certified ellipticity, forcing,
//! and smooth or deliberately rough initial data.

mod data;
mod diffusion;

pub use data::{
    manufactured_steady, rough_data_sampler, FieldSpec, ForcingSpec, InitialSpec, RoughDataSpec,
};
pub use diffusion::{ellipticity_theta, DiffusionField, DiffusionModel};

use crate::error::{Error, Result};
use crate::grid_spectral::{GridSpec, ScalarField};

/// `∂ₜu − ∇·(D∇u) = f` on the torus with `u(0) = u₀`, over `(0, T]`.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub diffusion: DiffusionField,
    pub forcing: ScalarField,
    pub initial: ScalarField,
    pub horizon: f64,
}

impl ProblemSpec {
    pub fn new(
        diffusion: DiffusionField,
        forcing: ScalarField,
        initial: ScalarField,
        horizon: f64,
    ) -> Result<Self> {
        if forcing.grid() != diffusion.grid() || initial.grid() != diffusion.grid() {
            return Err(Error::GridMismatch);
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::validation(
                "solver.horizon",
                format!("must be positive, got {horizon}"),
            ));
        }
        Ok(Self {
            diffusion,
            forcing,
            initial,
            horizon,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        self.diffusion.grid()
    }

    pub fn theta(&self) -> f64 {
        self.diffusion.theta()
    }

    /// Same diffusion and forcing, different initial data.
    pub fn with_initial(&self, initial: ScalarField) -> Result<Self> {
        Self::new(
            self.diffusion.clone(),
            self.forcing.clone(),
            initial,
            self.horizon,
        )
    }
}
