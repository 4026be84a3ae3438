use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::DiffusionField;
use crate::error::{Error, Result};
use crate::evolution::apply_operator;
use crate::grid_spectral::{GridSpec, ScalarField, MAX_DIM};
use crate::par;

/// Power-law initial data: `|û₀(ξ)| = amplitude·|ξ|^(-decay)` with random
/// phases, Hermitian-symmetric, zero mean and no Nyquist content.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoughDataSpec {
    pub decay: f64,
    pub seed: u64,
    #[serde(default = "one")]
    pub amplitude: f64,
}

fn one() -> f64 {
    1.0
}

/// Phase stream key for an integer wavevector: 21 bits per axis.
fn stream_key(xi: &[i64; MAX_DIM]) -> u64 {
    xi.iter()
        .fold(0u64, |acc, &k| (acc << 21) | ((k + (1 << 20)) as u64 & 0x1f_ffff))
}

/// Phase of a canonical mode. Each mode draws from its own ChaCha stream
/// keyed by the wavevector, so the phase of a given `ξ` does not depend on
/// the grid resolution or on iteration order.
fn mode_phase(seed: u64, xi: &[i64; MAX_DIM]) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_key(xi));
    2.0 * PI * rng.random::<f64>()
}

/// Canonical half of the lattice: first nonzero component positive.
fn is_canonical(xi: &[i64; MAX_DIM]) -> bool {
    xi.iter().find(|&&k| k != 0).is_some_and(|&k| k > 0)
}

/// Sample rough initial data. Requires `decay > n/2` so that the
/// infinite-lattice coefficient sum converges.
pub fn rough_data_sampler(spec: &RoughDataSpec, grid: GridSpec) -> Result<ScalarField> {
    let n = grid.dim();
    if !(spec.decay > n as f64 / 2.0) {
        return Err(Error::DecayTooSmall {
            decay: spec.decay,
            dim: n,
        });
    }
    let scale = grid.scale();
    let coeffs = par::map_range(grid.total(), |i| {
        let xi = grid.mode(i);
        if spec.amplitude == 0.0 || grid.touches_nyquist(i) || xi == [0; MAX_DIM] {
            return Complex64::default();
        }
        let mag2: f64 = xi.iter().map(|&k| (k as f64 * scale).powi(2)).sum();
        let modulus = spec.amplitude * mag2.powf(-0.5 * spec.decay);
        if is_canonical(&xi) {
            Complex64::from_polar(modulus, mode_phase(spec.seed, &xi))
        } else {
            let neg = xi.map(|k| -k);
            Complex64::from_polar(modulus, -mode_phase(spec.seed, &neg))
        }
    });
    ScalarField::from_coefficients(grid, coeffs)
}

/// Smooth, deterministic fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    Zero,
    Constant {
        value: f64,
    },
    /// `amplitude·cos(ξ·θ + phase)` with angles `θ = 2π x / L`.
    Mode {
        wavevector: Vec<i64>,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        phase: f64,
    },
    /// Mean-zero trigonometric polynomial of degree three along each axis
    /// (plus a cross term in two or more dimensions), scaled by `amplitude`.
    Smooth {
        #[serde(default = "one")]
        amplitude: f64,
    },
}

impl FieldSpec {
    pub fn validate(&self, grid: &GridSpec) -> std::result::Result<(), (&'static str, String)> {
        match self {
            FieldSpec::Mode { wavevector, .. } => {
                if wavevector.len() != grid.dim() {
                    return Err((
                        "wavevector",
                        format!("needs {} components, got {}", grid.dim(), wavevector.len()),
                    ));
                }
                let half = grid.nyquist() as i64;
                if wavevector.iter().any(|k| k.abs() >= half) {
                    return Err(("wavevector", format!("components must satisfy |k| < {half}")));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn build(&self, grid: GridSpec) -> ScalarField {
        let to_angle = 2.0 * PI / grid.length();
        match self {
            FieldSpec::Zero => ScalarField::zeros(grid),
            FieldSpec::Constant { value } => ScalarField::from_fn(grid, |_| *value),
            FieldSpec::Mode {
                wavevector,
                amplitude,
                phase,
            } => ScalarField::from_fn(grid, |x| {
                let arg: f64 = x.iter().zip(wavevector).map(|(xi, &k)| k as f64 * xi).sum();
                amplitude * (arg * to_angle + phase).cos()
            }),
            FieldSpec::Smooth { amplitude } => ScalarField::from_fn(grid, |x| {
                let mut v = 0.0;
                for &xa in x {
                    let t = xa * to_angle;
                    v += t.cos() + 0.5 * (2.0 * t + 0.3).sin() + 0.25 * (3.0 * t - 0.7).cos();
                }
                if x.len() >= 2 {
                    v += 0.5 * ((x[0] + x[1]) * to_angle).cos();
                }
                amplitude * v
            }),
        }
    }
}

/// Initial data choices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    Zero,
    Constant {
        value: f64,
    },
    Mode {
        wavevector: Vec<i64>,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        phase: f64,
    },
    Smooth {
        #[serde(default = "one")]
        amplitude: f64,
    },
    Rough {
        decay: f64,
        #[serde(default = "one")]
        amplitude: f64,
        /// Falls back to the experiment seed when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

impl InitialSpec {
    pub fn as_field_spec(&self) -> Option<FieldSpec> {
        Some(match self {
            InitialSpec::Zero => FieldSpec::Zero,
            InitialSpec::Constant { value } => FieldSpec::Constant { value: *value },
            InitialSpec::Mode {
                wavevector,
                amplitude,
                phase,
            } => FieldSpec::Mode {
                wavevector: wavevector.clone(),
                amplitude: *amplitude,
                phase: *phase,
            },
            InitialSpec::Smooth { amplitude } => FieldSpec::Smooth {
                amplitude: *amplitude,
            },
            InitialSpec::Rough { .. } => return None,
        })
    }

    pub fn build(&self, grid: GridSpec, default_seed: u64) -> Result<ScalarField> {
        match (self, self.as_field_spec()) {
            (_, Some(spec)) => {
                spec.validate(&grid)
                    .map_err(|(f, m)| Error::validation(format!("initial.{f}"), m))?;
                Ok(spec.build(grid))
            }
            (
                InitialSpec::Rough {
                    decay,
                    amplitude,
                    seed,
                },
                None,
            ) => rough_data_sampler(
                &RoughDataSpec {
                    decay: *decay,
                    amplitude: *amplitude,
                    seed: seed.unwrap_or(default_seed),
                },
                grid,
            ),
            _ => unreachable!(),
        }
    }
}

/// Forcing choices. `Manufactured` builds `f = -∇·(D∇u*)` so that the
/// target is a steady state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ForcingSpec {
    Zero,
    Constant {
        value: f64,
    },
    Mode {
        wavevector: Vec<i64>,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        phase: f64,
    },
    Manufactured {
        target: FieldSpec,
    },
}

impl ForcingSpec {
    pub fn build(&self, diffusion: &DiffusionField) -> Result<ScalarField> {
        let grid = *diffusion.grid();
        let plain = match self {
            ForcingSpec::Zero => FieldSpec::Zero,
            ForcingSpec::Constant { value } => FieldSpec::Constant { value: *value },
            ForcingSpec::Mode {
                wavevector,
                amplitude,
                phase,
            } => FieldSpec::Mode {
                wavevector: wavevector.clone(),
                amplitude: *amplitude,
                phase: *phase,
            },
            ForcingSpec::Manufactured { target } => {
                target
                    .validate(&grid)
                    .map_err(|(f, m)| Error::validation(format!("forcing.target.{f}"), m))?;
                return manufactured_steady(diffusion, &target.build(grid));
            }
        };
        plain
            .validate(&grid)
            .map_err(|(f, m)| Error::validation(format!("forcing.{f}"), m))?;
        Ok(plain.build(grid))
    }
}

/// `f = -∇·(D∇u*)`, making `u*` a steady state of the evolution.
pub fn manufactured_steady(diffusion: &DiffusionField, target: &ScalarField) -> Result<ScalarField> {
    Ok(apply_operator(diffusion, target)?.scaled(-1.0).to_physical())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_spectral::sobolev_norm;
    use crate::problem::DiffusionModel;

    #[test]
    fn zero_amplitude_gives_zero_field() {
        let g = GridSpec::periodic(1, 64).unwrap();
        let spec = RoughDataSpec {
            decay: 0.75,
            seed: 3,
            amplitude: 0.0,
        };
        let u = rough_data_sampler(&spec, g).unwrap();
        assert!(u.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn decay_must_exceed_half_dimension() {
        let g = GridSpec::periodic(2, 16).unwrap();
        let spec = RoughDataSpec {
            decay: 1.0,
            seed: 0,
            amplitude: 1.0,
        };
        assert!(matches!(
            rough_data_sampler(&spec, g),
            Err(Error::DecayTooSmall { .. })
        ));
    }

    #[test]
    fn rough_data_is_real_deterministic_and_resolution_consistent() {
        let spec = RoughDataSpec {
            decay: 1.25,
            seed: 11,
            amplitude: 1.0,
        };
        let g = GridSpec::periodic(2, 16).unwrap();
        let a = rough_data_sampler(&spec, g).unwrap();
        let b = rough_data_sampler(&spec, g).unwrap();
        assert_eq!(a, b);
        assert!(a.hermitian_defect() < 1e-15);
        assert_eq!(a.mean(), 0.0);
        let fine = rough_data_sampler(&spec, g.with_points(32).unwrap()).unwrap();
        let ca = a.coefficients();
        let cf = fine.coefficients();
        for i in 0..g.total() {
            if let Some(j) = fine.grid().index_of(&g.mode(i)) {
                if !g.touches_nyquist(i) {
                    assert_eq!(ca[i], cf[j]);
                }
            }
        }
    }

    #[test]
    fn rough_data_in_l2_but_not_h1() {
        // n = 1, s = 0.75: Σ|ξ|^{-1.5} converges, Σ|ξ|^{0.5} diverges
        let spec = RoughDataSpec {
            decay: 0.75,
            seed: 5,
            amplitude: 1.0,
        };
        let mut prev: Option<(f64, f64)> = None;
        for n in [256, 512, 1024, 2048, 4096] {
            let u = rough_data_sampler(&spec, GridSpec::periodic(1, n).unwrap()).unwrap();
            let l2 = sobolev_norm(&u, 0);
            let h1 = sobolev_norm(&u, 1);
            // lattice oracle: 2π·2·Σ_{ξ=1}^{N/2-1} ξ^{-2s+2k}
            let lattice = |p: f64| {
                2.0 * PI * 2.0 * (1..n / 2).map(|k| (k as f64).powf(p)).sum::<f64>()
            };
            assert!((l2 - lattice(-1.5)).abs() < 1e-10 * l2);
            assert!((h1 - lattice(0.5)).abs() < 1e-10 * h1);
            if let Some((pl2, ph1)) = prev {
                assert!(h1 / ph1 > 1.2);
                assert!(l2 / pl2 < 1.05);
            }
            prev = Some((l2, h1));
        }
        // infinite-lattice L² value: 4π ζ(1.5) ≈ 32.83
        let (l2, _) = prev.unwrap();
        assert!(l2 < 4.0 * PI * 2.612_375_348_685_488);
    }

    #[test]
    fn manufactured_forcing_matches_closed_forms() {
        let g = GridSpec::periodic(1, 32).unwrap();
        let sin = ScalarField::from_fn(g, |x| x[0].sin());
        let id = DiffusionModel::Identity.build(g).unwrap();
        let f = manufactured_steady(&id, &sin).unwrap();
        for (a, b) in f.values().iter().zip(sin.values().iter()) {
            assert!((a - b).abs() < 1e-12);
        }
        let zero = manufactured_steady(&id, &ScalarField::zeros(g)).unwrap();
        assert!(zero.values().iter().all(|v| v.abs() < 1e-15));

        let d = DiffusionModel::Sinusoidal { a: 2.0, b: 1.0 }.build(g).unwrap();
        let f = manufactured_steady(&d, &sin).unwrap();
        for (i, v) in f.values().iter().enumerate() {
            let x = g.coords(i)[0];
            assert!((v - (2.0 * x.sin() - (2.0 * x).cos())).abs() < 1e-12);
        }
    }

    #[test]
    fn mode_field_rejects_unrepresentable_wavevectors() {
        let g = GridSpec::periodic(1, 16).unwrap();
        let spec = FieldSpec::Mode {
            wavevector: vec![8],
            amplitude: 1.0,
            phase: 0.0,
        };
        assert!(spec.validate(&g).is_err());
    }
}
