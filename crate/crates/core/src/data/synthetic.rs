use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

use super::{Dataset, Split};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelMode {
    /// Label is which side of a fixed random hyperplane the sample lies on.
    Separable,
    /// Independent fair-coin labels: nothing to learn, only to memorize.
    RandomLabels,
}

const CLIP: f64 = 3.0;

/// Normal vector of the hyperplane through the cube center `(½, …, ½)` that
/// labels [`LabelMode::Separable`] data generated with `seed`.
pub fn separating_hyperplane(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// `n` samples of dimension `dim`. Each feature is a standard Gaussian clipped
/// to `[-3, 3]` and mapped affinely onto `[0, 1]`.
pub fn gen_synthetic(n: usize, dim: usize, mode: LabelMode, seed: u64) -> Result<Dataset> {
    if n < 2 || dim < 1 {
        return Err(Error::InvalidParameter(format!(
            "synthetic data needs n >= 2 and dim >= 1, got n = {n}, dim = {dim}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let features = Array2::from_shape_fn((n, dim), |_| {
        let z: f64 = StandardNormal.sample(&mut rng);
        (z.clamp(-CLIP, CLIP) + CLIP) / (2.0 * CLIP)
    });
    let labels = match mode {
        LabelMode::Separable => {
            let normal = separating_hyperplane(dim, seed);
            features
                .rows()
                .into_iter()
                .map(|row| usize::from(side(&normal, row.iter()) > 0.0))
                .collect()
        }
        LabelMode::RandomLabels => {
            let mut coin = ChaCha8Rng::seed_from_u64(seed);
            coin.set_stream(2);
            (0..n).map(|_| usize::from(coin.random::<bool>())).collect()
        }
    };
    Dataset::new(features, labels, 2, Split::Train)
}

fn side<'a>(normal: &[f64], x: impl Iterator<Item = &'a f64>) -> f64 {
    normal.iter().zip(x).map(|(w, xi)| w * (xi - 0.5)).sum()
}
