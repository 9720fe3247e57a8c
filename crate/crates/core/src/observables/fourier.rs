use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{KoopmanError, Result};

/// `√(2/D)·cos(wᵢᵀx + bᵢ)` with `wᵢ ~ N(0, σ⁻²I)` and `bᵢ ~ U[0, 2π)`,
/// regenerated from the seed so only `(D, σ, seed)` needs storing.
#[derive(Debug, Clone)]
pub(super) struct FourierFeatures {
    weights: DMatrix<f64>,
    offsets: Vec<f64>,
    sigma: f64,
    seed: u64,
}

impl FourierFeatures {
    pub fn sample(n_input: usize, n_features: usize, sigma: f64, seed: u64) -> Result<Self> {
        if n_features < 1 {
            return Err(KoopmanError::InvalidParameter("n_features must be at least 1".into()));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(KoopmanError::InvalidParameter(format!("sigma must be positive, got {sigma}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = DMatrix::zeros(n_features, n_input);
        for i in 0..n_features {
            for j in 0..n_input {
                let g: f64 = rng.sample(StandardNormal);
                weights[(i, j)] = g / sigma;
            }
        }
        let offsets = (0..n_features)
            .map(|_| rng.random::<f64>() * std::f64::consts::TAU)
            .collect();
        Ok(FourierFeatures {
            weights,
            offsets,
            sigma,
            seed,
        })
    }

    pub fn n_features(&self) -> usize {
        self.offsets.len()
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[cfg(test)]
    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn eval_into(&self, x: &[f64], out: &mut Vec<f64>) {
        let scale = (2.0 / self.n_features() as f64).sqrt();
        for (i, b) in self.offsets.iter().enumerate() {
            let proj: f64 = self.weights.row(i).iter().zip(x).map(|(w, v)| w * v).sum();
            out.push(scale * (proj + b).cos());
        }
    }
}
