use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use medge_core::sae::Activation;
use medge_core::spectral::Band;

#[derive(Debug, Parser)]
#[command(
    name = "medge",
    version,
    about = "Edge/cloud biosignal pipeline",
    args_override_self = true
)]
pub struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// `key = value` file of flag defaults; command-line flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "name", content = "args", rename_all = "kebab-case")]
pub enum Command {
    /// Write a synthetic EEG corpus (Bonn layout) or a two-modality set.
    GenData(GenDataArgs),
    /// Extract the five spectral features of every record.
    Features(FeaturesArgs),
    /// Fit normalization bounds and the threshold on a feature table.
    TrainFfc(TrainFfcArgs),
    /// Cross-validated accuracy over a threshold grid, with baselines.
    SweepGamma(SweepGammaArgs),
    /// Stratified k-fold evaluation of one classifier.
    CrossValidate(CrossValidateArgs),
    /// Train an autoencoder on vectorized records and export its halves.
    TrainSae(TrainSaeArgs),
    /// Joint versus per-modality compression distortion table.
    BenchCompression(BenchArgs),
    /// Encode vectors with an encoder half.
    Encode(EncodeArgs),
    /// Decode codes with a decoder half.
    Decode(DecodeArgs),
    /// Run the edge node and cloud sink over a record set.
    Simulate(SimulateArgs),
    /// Re-run a command from its manifest and compare the outputs.
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::GenData(_) => "gen-data",
            Command::Features(_) => "features",
            Command::TrainFfc(_) => "train-ffc",
            Command::SweepGamma(_) => "sweep-gamma",
            Command::CrossValidate(_) => "cross-validate",
            Command::TrainSae(_) => "train-sae",
            Command::BenchCompression(_) => "bench-compression",
            Command::Encode(_) => "encode",
            Command::Decode(_) => "decode",
            Command::Simulate(_) => "simulate",
            Command::Replay(_) => "replay",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct RecordArgs {
    /// Bonn-layout directories of normal records (comma-separated).
    #[arg(long, value_delimiter = ',')]
    pub normal: Vec<PathBuf>,
    /// Bonn-layout directories of seizure records (comma-separated).
    #[arg(long, value_delimiter = ',')]
    pub seizure: Vec<PathBuf>,
    /// Sampling rate of loaded or generated records, Hz.
    #[arg(long, default_value_t = 173.61)]
    pub rate: f64,
    /// Synthetic records per class when no directories are given.
    #[arg(long, default_value_t = 100)]
    pub n_per_class: usize,
    /// Synthetic record length in samples.
    #[arg(long, default_value_t = 4097)]
    pub len: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct BandArgs {
    #[arg(long, default_value_t = 0.5)]
    pub band_lo: f64,
    #[arg(long, default_value_t = 40.0)]
    pub band_hi: f64,
}

impl BandArgs {
    pub fn band(&self) -> Band {
        Band {
            lo: self.band_lo,
            hi: self.band_hi,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct MultimodalArgs {
    /// Directory holding EEG.csv and EOG.csv; synthetic data otherwise.
    #[arg(long)]
    pub mm_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 500)]
    pub records: usize,
    /// Samples per modality per record.
    #[arg(long, default_value_t = 128)]
    pub segment_len: usize,
    #[arg(long, default_value_t = 0.9)]
    pub cross_gain: f64,
    #[arg(long, default_value_t = 0.1)]
    pub noise_sd: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivationArg {
    Tanh,
    Identity,
}

impl From<ActivationArg> for Activation {
    fn from(a: ActivationArg) -> Self {
        match a {
            ActivationArg::Tanh => Activation::Tanh,
            ActivationArg::Identity => Activation::Identity,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct TrainArgs {
    #[arg(long, default_value_t = 0.5)]
    pub lr: f64,
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    #[arg(long, default_value_t = 8)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 1.0)]
    pub init_scale: f64,
    #[arg(long, value_enum, default_value_t = ActivationArg::Tanh)]
    pub activation: ActivationArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataKind {
    Eeg,
    Multimodal,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct GenDataArgs {
    #[arg(long, value_enum, default_value_t = DataKind::Eeg)]
    pub kind: DataKind,
    #[command(flatten)]
    pub records: RecordArgs,
    #[command(flatten)]
    pub multimodal: MultimodalArgs,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct FeaturesArgs {
    #[command(flatten)]
    pub records: RecordArgs,
    #[command(flatten)]
    pub band: BandArgs,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct TrainFfcArgs {
    /// Feature table written by `features`.
    #[arg(long)]
    pub features: PathBuf,
    #[command(flatten)]
    pub band: BandArgs,
    #[arg(long, default_value_t = 0.01)]
    pub grid_step: f64,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct SweepGammaArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[command(flatten)]
    pub band: BandArgs,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Threshold grid spacing.
    #[arg(long, default_value_t = 0.05)]
    pub step: f64,
    /// Neighbours of the KNN baseline.
    #[arg(long, default_value_t = 3)]
    pub knn_k: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierArg {
    Ffc,
    Fixed,
    Knn,
    Gnb,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct CrossValidateArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[command(flatten)]
    pub band: BandArgs,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, value_enum, default_value_t = ClassifierArg::Ffc)]
    pub classifier: ClassifierArg,
    /// Threshold of the `fixed` classifier.
    #[arg(long, default_value_t = 0.5)]
    pub gamma: f64,
    #[arg(long, default_value_t = 3)]
    pub knn_k: usize,
    #[arg(long, default_value_t = 0.01)]
    pub grid_step: f64,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct TrainSaeArgs {
    #[command(flatten)]
    pub records: RecordArgs,
    /// Encoder layer sizes, input first (comma-separated).
    #[arg(long, value_delimiter = ',', default_value = "64,16,8")]
    pub sizes: Vec<usize>,
    #[command(flatten)]
    pub train: TrainArgs,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct BenchArgs {
    #[command(flatten)]
    pub multimodal: MultimodalArgs,
    /// Target compression ratios (comma-separated).
    #[arg(long, value_delimiter = ',', default_value = "2,4,8")]
    pub crs: Vec<usize>,
    #[command(flatten)]
    pub train: TrainArgs,
    /// Insert a hidden layer between input and code.
    #[arg(long, default_value_t = false, action = clap::ArgAction::Set)]
    pub hidden_layer: bool,
    #[arg(long, default_value_t = 0.8)]
    pub train_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct EncodeArgs {
    /// Encoder half written by `train-sae`.
    #[arg(long)]
    pub encoder: PathBuf,
    /// CSV of input vectors, one per line.
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct DecodeArgs {
    /// Decoder half written by `train-sae`.
    #[arg(long)]
    pub decoder: PathBuf,
    /// CSV of codes, one per line.
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Cdt,
    Cbs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PayloadArg {
    Raw,
    Compressed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransportArg {
    Memory,
    Tcp,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub records: RecordArgs,
    #[command(flatten)]
    pub band: BandArgs,
    #[arg(long, value_enum, default_value_t = ModeArg::Cdt)]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value_t = PayloadArg::Raw)]
    pub payload: PayloadArg,
    /// Classifier from `train-ffc`; fitted on the simulated records otherwise.
    #[arg(long)]
    pub ffc_model: Option<PathBuf>,
    #[arg(long, default_value_t = 0.01)]
    pub grid_step: f64,
    #[arg(long)]
    pub encoder: Option<PathBuf>,
    #[arg(long)]
    pub decoder: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = TransportArg::Memory)]
    pub transport: TransportArg,
    #[arg(long, default_value_t = 2e-6)]
    pub tx_j_per_byte: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub cpu_j_per_flop: f64,
    #[arg(long, default_value_t = 0.01)]
    pub idle_w: f64,
    #[arg(long, default_value_t = 20_000.0)]
    pub battery_j: f64,
    /// Records per hour for the lifetime projection; back-to-back acquisition otherwise.
    #[arg(long)]
    pub duty: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub patient_id: u32,
    #[arg(long, default_value_t = 1_000_000.0)]
    pub link_bps: f64,
    #[arg(long, default_value_t = 0)]
    pub clock_origin_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
}
