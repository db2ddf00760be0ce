//! Datasets: a seeded synthetic generator and the MNIST IDX format.

mod idx;
mod synthetic;

use ndarray::{Array2, ArrayView2, Axis};

use crate::error::{Error, Result};

pub use idx::{load_idx, write_idx, IDX_IMAGES_MAGIC, IDX_LABELS_MAGIC};
pub use synthetic::{gen_synthetic, separating_hyperplane, LabelMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

/// Feature matrix (one row per sample, values in `[0, 1]`) with integer labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Array2<f64>,
    pub labels: Vec<usize>,
    /// Labels lie in `0..num_classes`.
    pub num_classes: usize,
    pub split: Split,
}

impl Dataset {
    pub fn new(
        features: Array2<f64>,
        labels: Vec<usize>,
        num_classes: usize,
        split: Split,
    ) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: features.nrows(),
                got: labels.len(),
            });
        }
        if let Some((index, &label)) = labels.iter().enumerate().find(|(_, &l)| l >= num_classes) {
            return Err(Error::LabelOutOfRange {
                index,
                label,
                classes: num_classes,
            });
        }
        Ok(Self {
            features,
            labels,
            num_classes,
            split,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn samples(&self) -> Samples<'_> {
        Samples {
            x: self.features.view(),
            y: &self.labels,
        }
    }

    /// Gathers the given rows into an owned batch.
    pub fn select(&self, indices: &[usize]) -> Batch {
        Batch {
            x: self.features.select(Axis(0), indices),
            y: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// Splits off the last `n_test` samples as a test set.
    pub fn split_off(self, n_test: usize) -> Result<(Dataset, Dataset)> {
        if n_test >= self.len() {
            return Err(Error::InvalidParameter(format!(
                "cannot split {} test samples from {}",
                n_test,
                self.len()
            )));
        }
        let n_train = self.len() - n_test;
        let train = Dataset {
            features: self.features.slice(ndarray::s![..n_train, ..]).to_owned(),
            labels: self.labels[..n_train].to_vec(),
            num_classes: self.num_classes,
            split: Split::Train,
        };
        let test = Dataset {
            features: self.features.slice(ndarray::s![n_train.., ..]).to_owned(),
            labels: self.labels[n_train..].to_vec(),
            num_classes: self.num_classes,
            split: Split::Test,
        };
        Ok((train, test))
    }

    /// Relabels digits by parity (even = 0, odd = 1) for the binary model.
    pub fn to_parity(&self) -> Dataset {
        Dataset {
            features: self.features.clone(),
            labels: self.labels.iter().map(|l| l % 2).collect(),
            num_classes: 2,
            split: self.split,
        }
    }
}

/// Borrowed view of a set of samples.
#[derive(Debug, Clone, Copy)]
pub struct Samples<'a> {
    pub x: ArrayView2<'a, f64>,
    pub y: &'a [usize],
}

impl<'a> Samples<'a> {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Rows `start..end`.
    pub fn slice(&self, start: usize, end: usize) -> Samples<'a> {
        Samples {
            x: self.x.slice_move(ndarray::s![start..end, ..]),
            y: &self.y[start..end],
        }
    }
}

/// Owned mini-batch.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub x: Array2<f64>,
    pub y: Vec<usize>,
}

impl Batch {
    pub fn samples(&self) -> Samples<'_> {
        Samples {
            x: self.x.view(),
            y: &self.y,
        }
    }
}
