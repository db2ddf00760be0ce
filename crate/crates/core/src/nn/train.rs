use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::observables::{noise_d, ObservableLog, Schedule};

use super::arch::{init_net, NetArch, WeightSnapshot};
use super::net::{backward_into, evaluate, sgd_update};
use super::snapfile::SnapshotSink;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub arch: NetArch,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub max_iterations: u64,
    /// Seed the dataset was generated with; carried for provenance.
    pub data_seed: u64,
    pub shuffle_seed: u64,
    /// Samples used to estimate `D` at each measurement.
    pub noise_subset_size: usize,
}

impl TrainConfig {
    pub fn validate(&self, train_size: usize) -> Result<()> {
        self.arch.validate()?;
        if self.batch_size == 0 {
            return Err(Error::InvalidParameter("batch size must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "learning rate must be > 0, got {}",
                self.learning_rate
            )));
        }
        if self.noise_subset_size == 0 || self.noise_subset_size > train_size {
            return Err(Error::InvalidParameter(format!(
                "noise subset size must be in 1..={train_size}, got {}",
                self.noise_subset_size
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainData {
    pub train: Dataset,
    pub test: Option<Dataset>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainRecord {
    pub t: u64,
    pub train_loss: f64,
    pub train_acc: f64,
    pub test_loss: Option<f64>,
    pub test_acc: Option<f64>,
    /// Noise strength `D` at this iteration.
    pub noise: f64,
}

/// Shuffled full-epoch traversal: each epoch visits every sample once in a
/// fresh random order; the final batch of an epoch may be short.
struct EpochSampler {
    rng: ChaCha8Rng,
    order: Vec<usize>,
    pos: usize,
    batch_size: usize,
}

impl EpochSampler {
    fn new(n: usize, batch_size: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        Self {
            rng,
            order,
            pos: 0,
            batch_size: batch_size.min(n),
        }
    }

    fn next_batch(&mut self) -> &[usize] {
        if self.pos >= self.order.len() {
            self.order.shuffle(&mut self.rng);
            self.pos = 0;
        }
        let end = (self.pos + self.batch_size).min(self.order.len());
        let batch = &self.order[self.pos..end];
        self.pos = end;
        batch
    }
}

/// Subset for the `k`-th noise measurement, drawn without replacement from a
/// stream of `shuffle_seed` separate from the batch order.
fn noise_subset(n: usize, size: usize, shuffle_seed: u64, k: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(shuffle_seed);
    rng.set_stream(1 + k);
    let mut idx = index::sample(&mut rng, n, size).into_vec();
    idx.sort_unstable();
    idx
}

fn schedule_iterations(cfg: &TrainConfig, schedule: &Schedule) -> Result<Vec<u64>> {
    schedule
        .times()
        .iter()
        .map(|&t| {
            if t.fract() != 0.0 || t < 1.0 || t > cfg.max_iterations as f64 {
                Err(Error::InvalidParameter(format!(
                    "schedule point {t} must be an integer in 1..={}",
                    cfg.max_iterations
                )))
            } else {
                Ok(t as u64)
            }
        })
        .collect()
}

/// Trains with constant-rate SGD, measuring at iteration 0 and at every
/// scheduled iteration. Snapshots are handed to `sink`.
pub fn train_run_with_sink(
    cfg: &TrainConfig,
    data: &TrainData,
    schedule: &Schedule,
    sink: &mut dyn SnapshotSink,
) -> Result<ObservableLog<TrainRecord>> {
    let train = &data.train;
    cfg.validate(train.len())?;
    let iterations = schedule_iterations(cfg, schedule)?;
    let arch = &cfg.arch;
    let mut w = init_net(arch)?;
    let mut grad = vec![0.0; w.w.len()];
    let mut sampler = EpochSampler::new(train.len(), cfg.batch_size, cfg.shuffle_seed);
    let mut log = ObservableLog::default();
    let mut measurement = 0u64;

    let mut measure = |w: &WeightSnapshot, log: &mut ObservableLog<TrainRecord>| -> Result<()> {
        let train_eval = evaluate(w, arch, train.samples())?;
        let test_eval = data
            .test
            .as_ref()
            .map(|t| evaluate(w, arch, t.samples()))
            .transpose()?;
        let subset = train.select(&noise_subset(
            train.len(),
            cfg.noise_subset_size,
            cfg.shuffle_seed,
            measurement,
        ));
        let noise = noise_d(w, arch, subset.samples())?;
        measurement += 1;
        log.push(TrainRecord {
            t: w.iteration,
            train_loss: train_eval.loss,
            train_acc: train_eval.accuracy,
            test_loss: test_eval.map(|e| e.loss),
            test_acc: test_eval.map(|e| e.accuracy),
            noise,
        });
        sink.push(w)
    };

    measure(&w, &mut log)?;
    let mut next = iterations.iter().peekable();
    for _ in 0..cfg.max_iterations {
        let batch = train.select(sampler.next_batch());
        backward_into(&w.w, arch, batch.samples(), &mut grad)?;
        sgd_update(&mut w, &grad, cfg.learning_rate)?;
        if next.peek() == Some(&&w.iteration) {
            next.next();
            measure(&w, &mut log)?;
        }
    }
    Ok(log)
}

/// [`train_run_with_sink`] keeping every snapshot in memory.
pub fn train_run(
    cfg: &TrainConfig,
    data: &TrainData,
    schedule: &Schedule,
) -> Result<(ObservableLog<TrainRecord>, Vec<WeightSnapshot>)> {
    let mut snapshots = Vec::new();
    let log = train_run_with_sink(cfg, data, schedule, &mut snapshots)?;
    Ok((log, snapshots))
}
