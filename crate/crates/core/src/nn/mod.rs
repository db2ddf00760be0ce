//! Fully connected ReLU networks trained by constant-rate SGD.
//!
//! Two architectures are provided: [`ArchKind::ToyA`], one hidden layer with
//! a single sigmoid output and squared-error loss on binary labels, and
//! [`ArchKind::FullyConnectedB`], hidden layers (default 100, 100) feeding a
//! softmax with negative log-likelihood loss.
//!
//! All parameters live in one flat vector; see [`NetArch::layers`] for the
//! layout.

mod arch;
mod net;
mod snapfile;
mod train;

pub use arch::{init_net, ArchKind, LayerLayout, NetArch, WeightSnapshot};
pub use net::{
    backward, backward_into, evaluate, forward_loss, gradient_statistics, per_sample_gradient, sgd_step, Evaluation,
    GradientRecord,
};
pub use snapfile::{SnapshotReader, SnapshotSink, SnapshotWriter, SNAPSHOT_MAGIC};
pub use train::{train_run, train_run_with_sink, TrainConfig, TrainData, TrainRecord};
