use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::observables::Configuration;

/// Spin configuration on the sphere of radius `√N` at Langevin time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinState {
    pub sigma: Vec<f64>,
    pub t: f64,
}

impl SpinState {
    pub fn new(sigma: Vec<f64>, t: f64) -> Self {
        Self { sigma, t }
    }

    pub fn n(&self) -> usize {
        self.sigma.len()
    }

    pub fn norm_sq(&self) -> f64 {
        self.sigma.iter().map(|x| x * x).sum()
    }

    /// Rescales `sigma` so that `|σ|² = N`.
    pub fn project_to_sphere(&mut self) {
        let scale = (self.n() as f64 / self.norm_sq()).sqrt();
        self.sigma.iter_mut().for_each(|x| *x *= scale);
    }
}

impl Configuration for SpinState {
    fn time(&self) -> f64 {
        self.t
    }

    fn values(&self) -> &[f64] {
        &self.sigma
    }
}

/// Uniform point on the sphere of radius `√N`: a standard Gaussian vector
/// rescaled to that norm. This is the infinite-temperature initial state.
pub fn random_sphere_config(n: usize, seed: u64) -> Result<SpinState> {
    if n == 0 {
        return Err(Error::InvalidParameter("N must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigma = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mut s = SpinState::new(sigma, 0.0);
    s.project_to_sphere();
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lies_on_sphere() {
        for n in [1, 2, 3, 17, 256, 10_000] {
            for seed in 0..5 {
                let s = random_sphere_config(n, seed).unwrap();
                assert!((s.norm_sq() - n as f64).abs() <= 1e-10 * n as f64);
                assert_eq!(s.t, 0.0);
            }
        }
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(random_sphere_config(50, 7).unwrap(), random_sphere_config(50, 7).unwrap());
        assert_ne!(random_sphere_config(50, 7).unwrap(), random_sphere_config(50, 8).unwrap());
    }

    #[test]
    fn component_mean_is_near_zero() {
        // Components have unit variance, so the mean has standard error 1/√N.
        let n = 10_000;
        for seed in 0..20 {
            let s = random_sphere_config(n, seed).unwrap();
            let mean = s.sigma.iter().sum::<f64>() / n as f64;
            assert!(mean.abs() < 3.0 / (n as f64).sqrt(), "seed {seed}: {mean}");
        }
    }

    #[test]
    fn zero_size_is_rejected() {
        assert!(random_sphere_config(0, 1).is_err());
    }
}
