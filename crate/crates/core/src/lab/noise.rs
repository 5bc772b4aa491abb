//! Reproducible Gaussian noise.
//!
//! Trial `t` of a run with base seed `s` draws from ChaCha8 stream `t` of
//! key `s`, so its noise depends only on `(s, t)` and never on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    sigma: f64,
    delta: Option<f64>,
}

impl NoiseModel {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::parameter("sigma", format!("must be non-negative, got {sigma}")));
        }
        Ok(Self { sigma, delta: None })
    }

    /// `sigma = delta * ||K x^dagger||_inf`.
    pub fn relative(delta: f64, data_sup_norm: f64) -> Result<Self> {
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(Error::parameter("delta", format!("must be non-negative, got {delta}")));
        }
        let mut model = Self::gaussian(delta * data_sup_norm)?;
        model.delta = Some(delta);
        Ok(model)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn delta(&self) -> Option<f64> {
        self.delta
    }
}

/// Generator for trial `trial` under `base_seed`.
pub fn trial_rng(base_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(trial);
    rng
}

/// `n` i.i.d. standard normal draws for one trial.
pub fn standard_normals(n: usize, base_seed: u64, trial: u64) -> Vec<f64> {
    let mut rng = trial_rng(base_seed, trial);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Noise vector for trial `trial`.
pub fn trial_noise(model: &NoiseModel, n: usize, base_seed: u64, trial: u64) -> Vec<f64> {
    if model.sigma == 0.0 {
        return vec![0.0; n];
    }
    let mut z = standard_normals(n, base_seed, trial);
    for v in &mut z {
        *v *= model.sigma;
    }
    z
}

/// `n` i.i.d. draws of the model's noise; identical for identical arguments.
pub fn gen_noise(model: &NoiseModel, n: usize, seed: u64) -> Vec<f64> {
    trial_noise(model, n, seed, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_sigma_is_silent() {
        let m = NoiseModel::gaussian(0.0).unwrap();
        assert_eq!(gen_noise(&m, 17, 3), vec![0.0; 17]);
    }

    #[test]
    fn reproducible_per_seed() {
        let m = NoiseModel::gaussian(0.7).unwrap();
        let a = gen_noise(&m, 1000, 42);
        let b = gen_noise(&m, 1000, 42);
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
        assert_ne!(a, gen_noise(&m, 1000, 43));
        assert_ne!(trial_noise(&m, 10, 42, 1), trial_noise(&m, 10, 42, 2));
    }

    #[test]
    fn prefix_stable_across_lengths() {
        let m = NoiseModel::gaussian(1.0).unwrap();
        let long = trial_noise(&m, 500, 9, 4);
        let short = trial_noise(&m, 200, 9, 4);
        assert_eq!(&long[..200], &short[..]);
    }

    #[test]
    fn moments_of_unit_noise() {
        let n = 100_000;
        let m = NoiseModel::gaussian(1.0).unwrap();
        let z = gen_noise(&m, n, 2024);
        let mean = z.iter().sum::<f64>() / n as f64;
        let var = z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 4.0 / (n as f64).sqrt(), "{mean}");
        assert!((var - 1.0).abs() < 0.05, "{var}");
    }

    #[test]
    fn relative_level_scales_sup_norm() {
        let m = NoiseModel::relative(0.1, 0.5).unwrap();
        assert!((m.sigma() - 0.05).abs() < 1e-17);
        assert_eq!(m.delta(), Some(0.1));
        assert!(NoiseModel::gaussian(-1.0).is_err());
        assert!(NoiseModel::relative(f64::NAN, 1.0).is_err());
    }
}
