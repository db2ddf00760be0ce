use crate::data::Samples;
use crate::error::Result;
use crate::nn::{NetArch, WeightSnapshot};

use super::same_time;

/// `D(t_w)` measurements of one run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NoiseSeries {
    pub points: Vec<(f64, f64)>,
}

impl NoiseSeries {
    pub fn get(&self, tw: f64) -> Option<f64> {
        self.points
            .iter()
            .find(|(t, _)| same_time(*t, tw))
            .map(|&(_, d)| d)
    }
}

impl FromIterator<(f64, f64)> for NoiseSeries {
    fn from_iter<I: IntoIterator<Item = (f64, f64)>>(iter: I) -> Self {
        Self {
            points: iter.into_iter().collect(),
        }
    }
}

/// SGD noise strength over `subset`: the mean over samples of
/// `(1/M)|∇L_s − ∇L|²`, where `∇L` is the subset-mean gradient.
pub fn noise_d(w: &WeightSnapshot, arch: &NetArch, subset: Samples<'_>) -> Result<f64> {
    let record = crate::nn::gradient_statistics(w, arch, subset)?;
    Ok(record.per_sample_sq_dev.unwrap_or(0.0))
}
