//! Experiment configuration files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use quenchlab_core::analysis::RegimeParams;
use quenchlab_core::data::LabelMode;
use quenchlab_core::nn::NetArch;
use quenchlab_core::pspin::PspinParams;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub pspin: Option<PspinSection>,
    pub train: Option<TrainSection>,
    #[serde(default)]
    pub schedule: ScheduleSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PspinSection {
    #[serde(default = "d_n")]
    pub n: usize,
    #[serde(default = "d_p")]
    pub p: usize,
    #[serde(default = "d_t_final")]
    pub t_final: f64,
    #[serde(default = "d_dt")]
    pub dt: f64,
    #[serde(default = "d_t_max")]
    pub t_max: f64,
    #[serde(default = "d_realizations")]
    pub realizations: u64,
    pub disorder_seed: u64,
    pub init_seed: u64,
    pub noise_seed: u64,
}

fn d_n() -> usize {
    256
}
fn d_p() -> usize {
    3
}
fn d_t_final() -> f64 {
    0.5
}
fn d_dt() -> f64 {
    0.01
}
fn d_t_max() -> f64 {
    1000.0
}
fn d_realizations() -> u64 {
    8
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArchName {
    ToyA,
    FullyConnectedB,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    Synthetic,
    Idx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelModeName {
    Separable,
    RandomLabels,
}

impl From<LabelModeName> for LabelMode {
    fn from(m: LabelModeName) -> Self {
        match m {
            LabelModeName::Separable => LabelMode::Separable,
            LabelModeName::RandomLabels => LabelMode::RandomLabels,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    pub arch: ArchName,
    /// Hidden width of `toy_a`; ignored by `fully_connected_b`.
    #[serde(default = "d_hidden")]
    pub hidden_size: usize,
    pub dataset: DatasetKind,
    /// Training samples; 500 for synthetic data, all records for IDX files.
    pub n_train: Option<usize>,
    #[serde(default)]
    pub n_test: usize,
    #[serde(default = "d_input_dim")]
    pub input_dim: usize,
    #[serde(default = "d_label_mode")]
    pub label_mode: LabelModeName,
    pub train_images: Option<PathBuf>,
    pub train_labels: Option<PathBuf>,
    pub test_images: Option<PathBuf>,
    pub test_labels: Option<PathBuf>,
    /// Replace digit labels by their parity (IDX data only).
    #[serde(default)]
    pub parity: bool,
    #[serde(default = "d_batch")]
    pub batch_size: usize,
    #[serde(default = "d_lr")]
    pub learning_rate: f64,
    pub max_iterations: u64,
    /// Defaults to `min(1000, train size)`.
    pub noise_subset_size: Option<usize>,
    pub data_seed: u64,
    pub init_seed: u64,
    pub shuffle_seed: u64,
}

fn d_hidden() -> usize {
    1000
}
fn d_input_dim() -> usize {
    32
}
fn d_label_mode() -> LabelModeName {
    LabelModeName::RandomLabels
}
fn d_batch() -> usize {
    100
}
fn d_lr() -> f64 {
    0.1
}

impl TrainSection {
    pub fn arch(&self, input_dim: usize) -> NetArch {
        match self.arch {
            ArchName::ToyA => NetArch::toy_a(input_dim, self.hidden_size, self.init_seed),
            ArchName::FullyConnectedB => NetArch::fully_connected_b(input_dim, self.init_seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    /// Ratio between successive measurement times.
    #[serde(default = "d_base")]
    pub base: f64,
    /// First measurement, in steps (`dt` units for spins, iterations for SGD).
    #[serde(default = "d_first")]
    pub first_step: f64,
    /// Explicit measurement steps; replaces the geometric schedule.
    pub points: Option<Vec<f64>>,
    /// Every `tw_stride`-th measurement time is used as a waiting time.
    #[serde(default = "d_stride")]
    pub tw_stride: usize,
}

fn d_base() -> f64 {
    1.2
}
fn d_first() -> f64 {
    1.0
}
fn d_stride() -> usize {
    4
}

impl Default for ScheduleSection {
    fn default() -> Self {
        Self {
            base: d_base(),
            first_step: d_first(),
            points: None,
            tw_stride: d_stride(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    #[serde(default = "d_theta")]
    pub theta: f64,
    #[serde(default = "d_eps")]
    pub eps_loss: f64,
    #[serde(default = "d_half")]
    pub half_window_decades: f64,
    /// Directory holding the run artifacts; defaults to the output directory.
    pub run_dir: Option<PathBuf>,
}

fn d_theta() -> f64 {
    0.2
}
fn d_eps() -> f64 {
    0.05
}
fn d_half() -> f64 {
    0.25
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            theta: d_theta(),
            eps_loss: d_eps(),
            half_window_decades: d_half(),
            run_dir: None,
        }
    }
}

impl AnalysisSection {
    pub fn params(&self) -> RegimeParams {
        RegimeParams {
            theta: self.theta,
            eps_loss: self.eps_loss,
            half_window_decades: self.half_window_decades,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    HiddenSize,
    LearningRate,
    BatchSize,
    NTrain,
    InitSeed,
    ShuffleSeed,
    DataSeed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub parameter: SweepParam,
    pub values: Vec<f64>,
}

fn whole(key: &str, v: f64) -> CliResult<u64> {
    if v.fract() != 0.0 || v < 0.0 || !v.is_finite() {
        return Err(CliError::Config(format!("sweep.values: {key} needs non-negative integers, got {v}")));
    }
    Ok(v as u64)
}

impl SweepSection {
    /// `train` with the swept parameter set to `value`.
    pub fn apply(&self, train: &TrainSection, value: f64) -> CliResult<TrainSection> {
        let mut t = train.clone();
        match self.parameter {
            SweepParam::HiddenSize => t.hidden_size = whole("hidden_size", value)? as usize,
            SweepParam::LearningRate => t.learning_rate = value,
            SweepParam::BatchSize => t.batch_size = whole("batch_size", value)? as usize,
            SweepParam::NTrain => t.n_train = Some(whole("n_train", value)? as usize),
            SweepParam::InitSeed => t.init_seed = whole("init_seed", value)?,
            SweepParam::ShuffleSeed => t.shuffle_seed = whole("shuffle_seed", value)?,
            SweepParam::DataSeed => t.data_seed = whole("data_seed", value)?,
        }
        Ok(t)
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn pspin(&self) -> CliResult<&PspinSection> {
        self.pspin
            .as_ref()
            .ok_or_else(|| CliError::Config("missing section [pspin]".into()))
    }

    pub fn train(&self) -> CliResult<&TrainSection> {
        self.train
            .as_ref()
            .ok_or_else(|| CliError::Config("missing section [train]".into()))
    }

    pub fn sweep(&self) -> CliResult<&SweepSection> {
        self.sweep
            .as_ref()
            .ok_or_else(|| CliError::Config("missing section [sweep]".into()))
    }
}

impl PspinSection {
    pub fn params(&self) -> PspinParams {
        PspinParams {
            n: self.n,
            p: self.p,
            t_final: self.t_final,
            dt: self.dt,
            t_max: self.t_max,
            disorder_seed: self.disorder_seed,
            init_seed: self.init_seed,
            noise_seed: self.noise_seed,
        }
    }
}

/// Canonical text of the given sections: keys sorted, defaults filled in.
pub fn canonical_text<T: Serialize>(sections: &T) -> String {
    let value = toml::Value::try_from(sections).expect("config sections serialize");
    toml::to_string(&value).expect("toml value serializes")
}

/// First 128 bits of the SHA-256 of the canonical text, as hex.
pub fn run_id<T: Serialize>(sections: &T) -> String {
    let digest = Sha256::digest(canonical_text(sections).as_bytes());
    digest[..16].iter().map(|b| format!("{b:02x}")).collect()
}
