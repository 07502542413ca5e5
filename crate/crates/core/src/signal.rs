//! Signal and dataset representation.
//!
//! Records are single-channel, labeled, and immutable once built. Bonn-style
//! directories (one ASCII integer per line, one file per record) are the
//! on-disk format; synthetic generators stand in when no real data is around.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Shortest window for which a spectrum is worth computing.
pub const MIN_WINDOW_LEN: usize = 8;

/// Nominal sampling rate of the multimodal generator, in Hz.
pub const MULTIMODAL_RATE_HZ: f64 = 128.0;

#[derive(Debug, Error)]
pub enum SignalError {
    #[error("invalid record: {0}")]
    InvalidRecord(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: expected one integer per line, found {content:?}")]
    Parse {
        path: PathBuf,
        line: usize,
        content: String,
    },
    #[error("no record files in {0}")]
    EmptyDirectory(PathBuf),
    #[error("window length {win_len} exceeds record length {len}")]
    WindowTooLong { win_len: usize, len: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, SignalError>;

/// Class tag carried by every record.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Normal,
    Seizure,
    Unlabeled,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Normal => "normal",
            Label::Seizure => "seizure",
            Label::Unlabeled => "unlabeled",
        }
    }
}

impl std::str::FromStr for Label {
    type Err = SignalError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "normal" => Ok(Label::Normal),
            "seizure" => Ok(Label::Seizure),
            "unlabeled" => Ok(Label::Unlabeled),
            other => Err(SignalError::InvalidParameter(format!("unknown label {other:?}"))),
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One labeled single-channel signal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeSeriesRecord {
    samples: Vec<f64>,
    rate: f64,
    label: Label,
    source_id: String,
}

impl TimeSeriesRecord {
    pub fn new(samples: Vec<f64>, rate: f64, label: Label, source_id: impl Into<String>) -> Result<Self> {
        let source_id = source_id.into();
        if samples.is_empty() {
            return Err(SignalError::InvalidRecord(format!("{source_id}: no samples")));
        }
        if !(rate.is_finite() && rate > 0.0) {
            return Err(SignalError::InvalidRecord(format!(
                "{source_id}: sampling rate {rate} must be positive and finite"
            )));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(SignalError::InvalidRecord(format!(
                "{source_id}: sample {i} is not finite"
            )));
        }
        Ok(Self {
            samples,
            rate,
            label,
            source_id,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn label(&self) -> Label {
        self.label
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Acquisition time covered by the record, in seconds.
    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.rate
    }

    /// The whole record as a single window.
    pub fn as_window(&self) -> Result<SignalWindow<'_>> {
        SignalWindow::new(self, 0, self.samples.len())
    }
}

/// A contiguous slice of a record.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignalWindow<'a> {
    samples: &'a [f64],
    rate: f64,
    source_id: &'a str,
    start: usize,
    label: Label,
}

impl<'a> SignalWindow<'a> {
    fn new(record: &'a TimeSeriesRecord, start: usize, len: usize) -> Result<Self> {
        if len < MIN_WINDOW_LEN {
            return Err(SignalError::InvalidParameter(format!(
                "window length {len} is below the minimum of {MIN_WINDOW_LEN}"
            )));
        }
        if start + len > record.len() {
            return Err(SignalError::WindowTooLong {
                win_len: len,
                len: record.len() - start.min(record.len()),
            });
        }
        Ok(Self {
            samples: &record.samples[start..start + len],
            rate: record.rate,
            source_id: &record.source_id,
            start,
            label: record.label,
        })
    }

    /// Builds a window over raw samples that do not belong to a record.
    pub fn from_slice(samples: &'a [f64], rate: f64, label: Label, source_id: &'a str) -> Result<Self> {
        if samples.len() < MIN_WINDOW_LEN {
            return Err(SignalError::InvalidParameter(format!(
                "window length {} is below the minimum of {MIN_WINDOW_LEN}",
                samples.len()
            )));
        }
        if !(rate.is_finite() && rate > 0.0) {
            return Err(SignalError::InvalidParameter(format!(
                "sampling rate {rate} must be positive and finite"
            )));
        }
        Ok(Self {
            samples,
            rate,
            source_id,
            start: 0,
            label,
        })
    }

    pub fn samples(&self) -> &'a [f64] {
        self.samples
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn label(&self) -> Label {
        self.label
    }

    /// `(source_id, start_index)` of the window within its parent record.
    pub fn origin(&self) -> (&'a str, usize) {
        (self.source_id, self.start)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Cuts a record into full-length windows at offsets `0, stride, 2*stride, ...`.
/// A trailing remainder shorter than `win_len` is dropped.
pub fn window_record(record: &TimeSeriesRecord, win_len: usize, stride: usize) -> Result<Vec<SignalWindow<'_>>> {
    if stride == 0 {
        return Err(SignalError::InvalidParameter("stride must be at least 1".into()));
    }
    if win_len < MIN_WINDOW_LEN {
        return Err(SignalError::InvalidParameter(format!(
            "window length {win_len} is below the minimum of {MIN_WINDOW_LEN}"
        )));
    }
    if win_len > record.len() {
        return Err(SignalError::WindowTooLong {
            win_len,
            len: record.len(),
        });
    }
    (0..=record.len() - win_len)
        .step_by(stride)
        .map(|start| SignalWindow::new(record, start, win_len))
        .collect()
}

/// A named collection of records sharing one sampling rate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordSet {
    name: String,
    records: Vec<TimeSeriesRecord>,
}

impl RecordSet {
    pub fn new(name: impl Into<String>, records: Vec<TimeSeriesRecord>) -> Result<Self> {
        let name = name.into();
        if let Some(first) = records.first() {
            if let Some(bad) = records.iter().find(|r| r.rate != first.rate) {
                return Err(SignalError::InvalidRecord(format!(
                    "{}: rate {} differs from the set rate {}",
                    bad.source_id, bad.rate, first.rate
                )));
            }
        }
        Ok(Self { name, records })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn records(&self) -> &[TimeSeriesRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Sampling rate shared by every record, `None` for an empty set.
    pub fn rate(&self) -> Option<f64> {
        self.records.first().map(|r| r.rate)
    }

    /// Concatenates several sets; rates must agree.
    pub fn concat(name: impl Into<String>, sets: impl IntoIterator<Item = RecordSet>) -> Result<Self> {
        let records = sets.into_iter().flat_map(|s| s.records).collect();
        Self::new(name, records)
    }

    pub fn count_label(&self, label: Label) -> usize {
        self.records.iter().filter(|r| r.label == label).count()
    }
}

fn sorted_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|source| SignalError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut files = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|source| SignalError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let path = entry.path();
        if path.is_file() {
            files.push(path);
        }
    }
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(files)
}

fn parse_bonn_file(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|source| SignalError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut samples = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r').trim();
        if line.is_empty() {
            continue;
        }
        let value: i64 = line.parse().map_err(|_| SignalError::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            content: line.to_string(),
        })?;
        samples.push(value as f64);
    }
    Ok(samples)
}

/// Loads one Bonn-style class directory: every regular file is a record,
/// ordered lexicographically by file name and identified by its stem.
pub fn load_bonn_dir(dir: impl AsRef<Path>, label: Label, rate: f64) -> Result<RecordSet> {
    let dir = dir.as_ref();
    let files = sorted_files(dir)?;
    if files.is_empty() {
        return Err(SignalError::EmptyDirectory(dir.to_path_buf()));
    }
    let mut records = Vec::with_capacity(files.len());
    for path in files {
        let samples = parse_bonn_file(&path)?;
        let id = path
            .file_stem()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let record = TimeSeriesRecord::new(samples, rate, label, id).map_err(|e| match e {
            SignalError::InvalidRecord(msg) => SignalError::InvalidRecord(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        records.push(record);
    }
    let name = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| dir.display().to_string());
    RecordSet::new(name, records)
}

/// Writes records in the Bonn layout, one file per record named after its
/// source id. Samples are rounded to the nearest integer.
pub fn write_bonn_dir(dir: impl AsRef<Path>, records: &[TimeSeriesRecord]) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|source| SignalError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    for record in records {
        let path = dir.join(format!("{}.txt", record.source_id));
        let mut text = String::with_capacity(record.len() * 6);
        for s in &record.samples {
            text.push_str(&format!("{}\n", s.round() as i64));
        }
        fs::write(&path, text).map_err(|source| SignalError::Io { path, source })?;
    }
    Ok(())
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Stationary AR(1) sequence with unit marginal variance.
fn ar1_unit(rng: &mut ChaCha8Rng, len: usize, phi: f64) -> Vec<f64> {
    let innov = (1.0 - phi * phi).sqrt();
    let mut out = Vec::with_capacity(len);
    let mut state = gaussian(rng);
    for _ in 0..len {
        out.push(state);
        state = phi * state + innov * gaussian(rng);
    }
    out
}

/// Background EEG: sum of a slow and a fast AR(1) component, scaled to `sd`.
fn background(rng: &mut ChaCha8Rng, len: usize, sd: f64) -> Vec<f64> {
    let slow = ar1_unit(rng, len, 0.97);
    let fast = ar1_unit(rng, len, 0.6);
    let scale = sd / (0.8f64 * 0.8 + 0.6 * 0.6).sqrt();
    slow.iter()
        .zip(&fast)
        .map(|(s, f)| scale * (0.8 * s + 0.6 * f))
        .collect()
}

/// Hann-tapered burst envelope with `n_bursts` non-overlapping bursts.
fn burst_envelope(rng: &mut ChaCha8Rng, len: usize, rate: f64, n_bursts: usize) -> Vec<f64> {
    let mut env = vec![0.15f64; len];
    let slot = len / n_bursts.max(1);
    for b in 0..n_bursts {
        let burst_len = ((rng.gen_range(0.7..0.95) * slot as f64) as usize).max(1);
        let slack = slot.saturating_sub(burst_len);
        let start = b * slot + if slack > 0 { rng.gen_range(0..=slack) } else { 0 };
        let ramp = ((0.5 * rate) as usize).clamp(1, burst_len / 2 + 1);
        for i in 0..burst_len {
            let idx = start + i;
            if idx >= len {
                break;
            }
            let edge = i.min(burst_len - 1 - i);
            let w = if edge < ramp {
                0.5 - 0.5 * (std::f64::consts::PI * edge as f64 / ramp as f64).cos()
            } else {
                1.0
            };
            env[idx] = env[idx].max(w);
        }
    }
    env
}

/// Synthetic stand-in for the three Bonn classes.
///
/// Returns `n_per_class` records of each normal sub-style (eyes open `A`,
/// eyes closed `B` with an alpha rhythm) followed by `n_per_class` seizure
/// records (`E`) carrying high-amplitude 3-7 Hz rhythmic bursts.
pub fn gen_synthetic_eeg(n_per_class: usize, len: usize, rate: f64, seed: u64) -> Result<RecordSet> {
    if n_per_class == 0 {
        return Err(SignalError::InvalidParameter("n_per_class must be at least 1".into()));
    }
    if len < MIN_WINDOW_LEN {
        return Err(SignalError::InvalidParameter(format!(
            "record length must be at least {MIN_WINDOW_LEN}"
        )));
    }
    if !(rate.is_finite() && rate > 0.0) {
        return Err(SignalError::InvalidParameter(format!(
            "sampling rate {rate} must be positive and finite"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tau = 2.0 * std::f64::consts::PI;
    let mut records = Vec::with_capacity(3 * n_per_class);

    for i in 0..n_per_class {
        let sd = rng.gen_range(20.0..40.0);
        let samples = background(&mut rng, len, sd);
        records.push(TimeSeriesRecord::new(samples, rate, Label::Normal, format!("A{i:03}"))?);
    }
    for i in 0..n_per_class {
        let sd = rng.gen_range(20.0..35.0);
        let mut samples = background(&mut rng, len, sd);
        let alpha_hz = rng.gen_range(8.0..12.0);
        let alpha_amp = rng.gen_range(10.0..25.0);
        let mod_hz = rng.gen_range(0.05..0.2);
        let phase = rng.gen_range(0.0..tau);
        for (n, s) in samples.iter_mut().enumerate() {
            let t = n as f64 / rate;
            let envelope = 0.75 + 0.25 * (tau * mod_hz * t).sin();
            *s += alpha_amp * envelope * (tau * alpha_hz * t + phase).sin();
        }
        records.push(TimeSeriesRecord::new(samples, rate, Label::Normal, format!("B{i:03}"))?);
    }
    for i in 0..n_per_class {
        let sd = rng.gen_range(20.0..40.0);
        let mut samples = background(&mut rng, len, sd);
        let f0 = rng.gen_range(3.0..7.0);
        let amp = rng.gen_range(120.0..200.0);
        let harmonic = rng.gen_range(0.2..0.5);
        let phase = rng.gen_range(0.0..tau);
        let n_bursts = rng.gen_range(2..=4);
        let env = burst_envelope(&mut rng, len, rate, n_bursts);
        for (n, s) in samples.iter_mut().enumerate() {
            let t = n as f64 / rate;
            let arg = tau * f0 * t + phase;
            *s += amp * env[n] * (arg.sin() + harmonic * (2.0 * arg).sin());
        }
        records.push(TimeSeriesRecord::new(
            samples,
            rate,
            Label::Seizure,
            format!("E{i:03}"),
        )?);
    }
    RecordSet::new("synthetic-eeg", records)
}

/// One named modality: a record-by-sample matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Modality {
    pub name: String,
    pub data: Vec<Vec<f64>>,
}

/// Aligned multimodal recordings: every modality has the same record count
/// and per-record length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultimodalSet {
    modalities: Vec<Modality>,
    rate: f64,
}

impl MultimodalSet {
    pub fn new(modalities: Vec<Modality>, rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(SignalError::InvalidParameter(format!(
                "sampling rate {rate} must be positive and finite"
            )));
        }
        if let Some(first) = modalities.first() {
            let n = first.data.len();
            let len = first.data.first().map_or(0, Vec::len);
            for m in &modalities {
                if m.data.len() != n || m.data.iter().any(|row| row.len() != len) {
                    return Err(SignalError::InvalidRecord(format!(
                        "modality {} is not aligned with {}",
                        m.name, first.name
                    )));
                }
                if m.data.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(SignalError::InvalidRecord(format!(
                        "modality {} has non-finite samples",
                        m.name
                    )));
                }
            }
            for (i, m) in modalities.iter().enumerate() {
                if modalities[..i].iter().any(|o| o.name == m.name) {
                    return Err(SignalError::InvalidRecord(format!(
                        "duplicate modality name {}",
                        m.name
                    )));
                }
            }
        }
        Ok(Self { modalities, rate })
    }

    pub fn modalities(&self) -> &[Modality] {
        &self.modalities
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn n_records(&self) -> usize {
        self.modalities.first().map_or(0, |m| m.data.len())
    }

    pub fn record_len(&self) -> usize {
        self.modalities.first().and_then(|m| m.data.first()).map_or(0, Vec::len)
    }

    pub fn modality(&self, name: &str) -> Option<&Modality> {
        self.modalities.iter().find(|m| m.name == name)
    }
}

/// FIR taps of the EEG-to-EOG leakage path used by the multimodal generator.
pub const MIXING_TAPS: [f64; 4] = [0.7, 0.5, -0.4, 0.3];

/// The generator's `len x len` mixing matrix: a causal convolution with
/// [`MIXING_TAPS`], zero-padded at the start of each record.
pub fn mixing_matrix(len: usize) -> Vec<Vec<f64>> {
    (0..len)
        .map(|t| {
            (0..len)
                .map(|s| {
                    if s <= t && t - s < MIXING_TAPS.len() {
                        MIXING_TAPS[t - s]
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

fn apply_mixing(a: &[f64]) -> Vec<f64> {
    (0..a.len())
        .map(|t| {
            MIXING_TAPS
                .iter()
                .enumerate()
                .filter(|(j, _)| *j <= t)
                .map(|(j, h)| h * a[t - j])
                .sum()
        })
        .collect()
}

/// Two aligned modalities, `EEG` and `EOG`, with controllable coupling:
/// `EOG = cross_gain * mix(EEG) + sqrt(1 - cross_gain^2) * own + noise_sd * white`,
/// where `own` is an independent process with the same statistics as `EEG`.
pub fn gen_synthetic_multimodal(
    n_records: usize,
    len: usize,
    cross_gain: f64,
    noise_sd: f64,
    seed: u64,
) -> Result<MultimodalSet> {
    if n_records == 0 {
        return Err(SignalError::InvalidParameter("n_records must be at least 1".into()));
    }
    if len < MIN_WINDOW_LEN {
        return Err(SignalError::InvalidParameter(format!(
            "record length must be at least {MIN_WINDOW_LEN}"
        )));
    }
    if !(0.0..=1.0).contains(&cross_gain) {
        return Err(SignalError::InvalidParameter(format!(
            "cross_gain {cross_gain} outside [0, 1]"
        )));
    }
    if !(noise_sd.is_finite() && noise_sd >= 0.0) {
        return Err(SignalError::InvalidParameter(format!(
            "noise_sd {noise_sd} must be finite and non-negative"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let own_gain = (1.0 - cross_gain * cross_gain).max(0.0).sqrt();
    let mut eeg = Vec::with_capacity(n_records);
    let mut eog = Vec::with_capacity(n_records);
    for _ in 0..n_records {
        let a = ar1_unit(&mut rng, len, 0.9);
        let own = ar1_unit(&mut rng, len, 0.9);
        let mixed = apply_mixing(&a);
        let b = mixed
            .iter()
            .zip(&own)
            .map(|(m, o)| {
                let white = if noise_sd > 0.0 {
                    noise_sd * gaussian(&mut rng)
                } else {
                    0.0
                };
                cross_gain * m + own_gain * o + white
            })
            .collect();
        eeg.push(a);
        eog.push(b);
    }
    MultimodalSet::new(
        vec![
            Modality {
                name: "EEG".into(),
                data: eeg,
            },
            Modality {
                name: "EOG".into(),
                data: eog,
            },
        ],
        MULTIMODAL_RATE_HZ,
    )
}
