//! Spherical 3-spin model under Langevin dynamics.
//!
//! Energy `E(σ) = −Σ_{i<j<k} J_ijk σ_i σ_j σ_k` with one Gaussian coupling of
//! variance `3/N²` per unordered triple, on the sphere `|σ|² = N`.

mod couplings;
mod kernel;
mod dynamics;
mod state;

pub use couplings::{binomial, sample_couplings, triple_rank, triple_unrank, CouplingTensor};
pub use dynamics::{langevin_step, run_quench, LangevinNoise, PspinParams, QuenchRecord};
pub use state::{random_sphere_config, SpinState};

/// Dynamical transition temperature of the p = 3 spherical model.
pub const T_DYNAMICAL: f64 = 0.612;
