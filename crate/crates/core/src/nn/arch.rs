use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Uniform};

use crate::error::{Error, Result};
use crate::observables::Configuration;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArchKind {
    ToyA,
    FullyConnectedB,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetArch {
    pub kind: ArchKind,
    pub input_dim: usize,
    pub hidden_sizes: Vec<usize>,
    pub output_dim: usize,
    pub init_seed: u64,
}

/// Location of one dense layer inside the flat parameter vector: the
/// `outputs × inputs` weight matrix (row-major) followed by `outputs` biases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerLayout {
    pub inputs: usize,
    pub outputs: usize,
    pub weight_offset: usize,
    pub bias_offset: usize,
}

impl LayerLayout {
    pub fn end(&self) -> usize {
        self.bias_offset + self.outputs
    }
}

impl NetArch {
    pub fn toy_a(input_dim: usize, hidden: usize, init_seed: u64) -> Self {
        Self {
            kind: ArchKind::ToyA,
            input_dim,
            hidden_sizes: vec![hidden],
            output_dim: 1,
            init_seed,
        }
    }

    pub fn fully_connected_b(input_dim: usize, init_seed: u64) -> Self {
        Self {
            kind: ArchKind::FullyConnectedB,
            input_dim,
            hidden_sizes: vec![100, 100],
            output_dim: 10,
            init_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArch(msg));
        if self.input_dim == 0 || self.output_dim == 0 || self.hidden_sizes.contains(&0) {
            return bad(format!("zero-sized layer in {:?}", self.layer_sizes()));
        }
        match self.kind {
            ArchKind::ToyA => {
                if self.hidden_sizes.len() != 1 {
                    return bad(format!(
                        "ToyA has exactly one hidden layer, got {:?}",
                        self.hidden_sizes
                    ));
                }
                if self.output_dim != 1 {
                    return bad(format!("ToyA has one output, got {}", self.output_dim));
                }
            }
            ArchKind::FullyConnectedB => {
                if self.hidden_sizes.is_empty() {
                    return bad("FullyConnectedB needs at least one hidden layer".into());
                }
                if self.output_dim < 2 {
                    return bad(format!(
                        "softmax output needs >= 2 classes, got {}",
                        self.output_dim
                    ));
                }
            }
        }
        Ok(())
    }

    /// Number of classes the labels may take.
    pub fn num_classes(&self) -> usize {
        match self.kind {
            ArchKind::ToyA => 2,
            ArchKind::FullyConnectedB => self.output_dim,
        }
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = Vec::with_capacity(self.hidden_sizes.len() + 2);
        sizes.push(self.input_dim);
        sizes.extend_from_slice(&self.hidden_sizes);
        sizes.push(self.output_dim);
        sizes
    }

    /// Layers in forward order, packed back to back.
    pub fn layers(&self) -> Vec<LayerLayout> {
        let sizes = self.layer_sizes();
        let mut offset = 0;
        sizes
            .windows(2)
            .map(|w| {
                let layer = LayerLayout {
                    inputs: w[0],
                    outputs: w[1],
                    weight_offset: offset,
                    bias_offset: offset + w[0] * w[1],
                };
                offset = layer.end();
                layer
            })
            .collect()
    }

    /// Total parameter count `M`, biases included.
    pub fn num_params(&self) -> usize {
        self.layers().last().map_or(0, LayerLayout::end)
    }
}

/// All weights and biases of a network at SGD iteration `iteration`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSnapshot {
    pub w: Vec<f64>,
    pub iteration: u64,
}

impl Configuration for WeightSnapshot {
    fn time(&self) -> f64 {
        self.iteration as f64
    }

    fn values(&self) -> &[f64] {
        &self.w
    }
}

/// Draws every weight and bias of a layer from `U(−1/√fan_in, 1/√fan_in)`.
pub fn init_net(arch: &NetArch) -> Result<WeightSnapshot> {
    arch.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(arch.init_seed);
    let mut w = Vec::with_capacity(arch.num_params());
    for layer in arch.layers() {
        let bound = 1.0 / (layer.inputs as f64).sqrt();
        let dist = Uniform::new_inclusive(-bound, bound).expect("finite bound");
        w.extend((0..layer.outputs * (layer.inputs + 1)).map(|_| dist.sample(&mut rng)));
    }
    Ok(WeightSnapshot { w, iteration: 0 })
}
