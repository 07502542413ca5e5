//! Edge node and cloud sink simulation.
//!
//! The edge node processes records one at a time in logical time. In
//! class-based transmission (CDT) it classifies each record and sends only
//! the features of normal records; a detected seizure triggers an alert
//! followed by the record itself (raw or autoencoder-compressed). The
//! cloud-based baseline (CBS) forwards every record as full data with no
//! local processing.
//!
//! Cost model per record: `tx_j_per_byte * bytes + cpu_j_per_flop * flops
//! + idle_w * acquisition_time`. Flops are counted as `5 N log2 N` for the
//! DFT, `10 K` for the features over `K` in-band bins, and
//! `2 * sum(d_{i-1} d_i)` for the encoder.

use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::thread;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ffc::{FfcModel, NormalizedFeatures, Status};
use crate::sae::{distortion_prd, DecoderPart, EncoderPart, SaeError};
use crate::signal::{RecordSet, TimeSeriesRecord};
use crate::spectral::{band_bins, extract_ff, magnitude_spectrum_of, Band, SpectralError};
use crate::wire::{encode_message, FrameReader, Kind, Payload, StreamError, WireError, WireMessage};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Sae(#[from] SaeError),
    #[error(transparent)]
    Wire(#[from] WireError),
    #[error("stream {0}")]
    Stream(#[from] StreamError),
    #[error("compressed data at byte offset {offset} but no decoder is loaded")]
    MissingDecoder { offset: usize },
    #[error("compressed data at byte offset {offset} carries fingerprint {got:#018x}, decoder has {expected:#018x}")]
    FingerprintMismatch { offset: usize, expected: u64, got: u64 },
    #[error("stream carries {received} records but the ground truth has {truth}")]
    TruthMismatch { received: usize, truth: usize },
    #[error("average power is zero; lifetime is unbounded")]
    ZeroPower,
    #[error("transport: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SimError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Classify locally; full data only on detected seizures.
    Cdt,
    /// Forward every record unprocessed.
    Cbs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmergencyPayload {
    Raw,
    Compressed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyParams {
    pub tx_j_per_byte: f64,
    pub cpu_j_per_flop: f64,
    pub idle_w: f64,
    pub battery_j: f64,
}

impl Default for EnergyParams {
    fn default() -> Self {
        Self {
            tx_j_per_byte: 2e-6,
            cpu_j_per_flop: 1e-9,
            idle_w: 0.01,
            battery_j: 20_000.0,
        }
    }
}

impl EnergyParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.tx_j_per_byte, self.cpu_j_per_flop, self.idle_w, self.battery_j];
        if all.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || self.battery_j <= 0.0 {
            return Err(SimError::Config(format!("invalid energy parameters {self:?}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeConfig {
    pub mode: Mode,
    pub emergency_payload: EmergencyPayload,
    /// Required in CDT mode.
    pub ffc: Option<FfcModel>,
    /// Required for compressed emergency payloads.
    pub encoder: Option<EncoderPart>,
    pub band: Band,
    pub energy: EnergyParams,
    pub patient_id: u32,
    /// Logical clock origin for alert timestamps.
    pub clock_origin_ms: u64,
    /// Uplink rate used to convert bytes to airtime.
    pub link_bps: f64,
}

impl EdgeConfig {
    pub fn cdt(ffc: FfcModel) -> Self {
        Self {
            mode: Mode::Cdt,
            emergency_payload: EmergencyPayload::Raw,
            ffc: Some(ffc),
            encoder: None,
            band: Band::default(),
            energy: EnergyParams::default(),
            patient_id: 1,
            clock_origin_ms: 0,
            link_bps: 1_000_000.0,
        }
    }

    pub fn cbs() -> Self {
        Self {
            mode: Mode::Cbs,
            emergency_payload: EmergencyPayload::Raw,
            ffc: None,
            encoder: None,
            band: Band::default(),
            energy: EnergyParams::default(),
            patient_id: 1,
            clock_origin_ms: 0,
            link_bps: 1_000_000.0,
        }
    }

    /// Checks the configuration against the records it will process.
    pub fn validate(&self, records: &RecordSet) -> Result<()> {
        self.energy.validate()?;
        if !(self.link_bps.is_finite() && self.link_bps > 0.0) {
            return Err(SimError::Config(format!(
                "link rate {} must be positive",
                self.link_bps
            )));
        }
        if self.mode == Mode::Cbs {
            return Ok(());
        }
        if self.ffc.is_none() {
            return Err(SimError::Config(
                "class-based transmission needs a trained classifier".into(),
            ));
        }
        if self.emergency_payload == EmergencyPayload::Compressed {
            let enc = self
                .encoder
                .as_ref()
                .ok_or_else(|| SimError::Config("compressed emergency payload needs an encoder".into()))?;
            if let Some(r) = records.records().iter().find(|r| r.len() < enc.input_dim()) {
                return Err(SimError::Config(format!(
                    "record {} has {} samples, fewer than the encoder input dimension {}",
                    r.source_id(),
                    r.len(),
                    enc.input_dim()
                )));
            }
        }
        Ok(())
    }
}

/// Reduces a record to `dim` values by averaging `dim` contiguous segments
/// (segment `i` spans `floor(i n / dim)..floor((i + 1) n / dim)`).
pub fn vectorize(samples: &[f64], dim: usize) -> Vec<f64> {
    let n = samples.len();
    (0..dim)
        .map(|i| {
            let lo = i * n / dim;
            let hi = ((i + 1) * n / dim).max(lo + 1).min(n);
            samples[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

pub fn dft_flops(n: usize) -> u64 {
    if n < 2 {
        return 0;
    }
    (5.0 * n as f64 * (n as f64).log2()).round() as u64
}

pub fn feature_flops(in_band_bins: usize) -> u64 {
    10 * in_band_bins as u64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub record: usize,
    pub source_id: String,
    /// `None` in CBS mode, where nothing is classified.
    pub status: Option<Status>,
    pub score: Option<f64>,
    pub kinds: Vec<Kind>,
    pub seqs: Vec<u32>,
    pub bytes: usize,
    pub flops: u64,
    pub duration_s: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TransmissionLog {
    pub mode: Option<Mode>,
    pub entries: Vec<LogEntry>,
    pub total_bytes: usize,
    pub total_flops: u64,
    pub tx_energy_j: f64,
    pub cpu_energy_j: f64,
    pub idle_energy_j: f64,
    pub energy_j: f64,
    pub duration_s: f64,
    pub airtime_s: f64,
}

impl TransmissionLog {
    pub fn n_records(&self) -> usize {
        self.entries.len()
    }

    pub fn count_kind(&self, kind: Kind) -> usize {
        self.entries
            .iter()
            .flat_map(|e| &e.kinds)
            .filter(|k| **k == kind)
            .count()
    }
}

fn record_status(record: &TimeSeriesRecord, model: &FfcModel, band: Band) -> Result<(NormalizedFeatures, Status, u64)> {
    let spectrum = magnitude_spectrum_of(record.samples(), record.rate())?;
    let bins = band_bins(&spectrum, band)?.len();
    let (nf, status) = model.predict(&extract_ff(&spectrum, band)?);
    Ok((nf, status, dft_flops(record.len()) + feature_flops(bins)))
}

fn full_data(record: &TimeSeriesRecord) -> Payload {
    Payload::FullData {
        rate_hz: record.rate() as f32,
        samples: record.samples().iter().map(|&s| s as f32).collect(),
    }
}

/// Runs the edge node over `records`, writing the encoded stream to `sink`.
pub fn run_edge_into(records: &RecordSet, cfg: &EdgeConfig, sink: &mut dyn Write) -> Result<TransmissionLog> {
    cfg.validate(records)?;
    let mut log = TransmissionLog {
        mode: Some(cfg.mode),
        ..TransmissionLog::default()
    };
    let mut seq: u32 = 0;
    let mut clock_s = 0.0;
    for (i, record) in records.records().iter().enumerate() {
        let mut payloads = Vec::with_capacity(2);
        let mut flops = 0;
        let mut status = None;
        let mut score = None;
        match cfg.mode {
            Mode::Cbs => payloads.push(full_data(record)),
            Mode::Cdt => {
                let model = cfg.ffc.as_ref().expect("validated");
                let (nf, s, f) = record_status(record, model, cfg.band)?;
                flops += f;
                status = Some(s);
                score = Some(nf.score);
                match s {
                    Status::Normal => {
                        payloads.push(Payload::Features {
                            features: nf.values.map(|v| v as f32),
                            score: nf.score as f32,
                            status: s,
                        });
                    }
                    Status::Seizure => {
                        let t_ms = cfg.clock_origin_ms + ((clock_s + record.duration_s()) * 1000.0).round() as u64;
                        payloads.push(Payload::Alert {
                            status: s,
                            score: nf.score as f32,
                            unix_millis: t_ms,
                        });
                        match cfg.emergency_payload {
                            EmergencyPayload::Raw => payloads.push(full_data(record)),
                            EmergencyPayload::Compressed => {
                                let enc = cfg.encoder.as_ref().expect("validated");
                                let z = enc.encode(&vectorize(record.samples(), enc.input_dim()))?;
                                flops += enc.flops();
                                payloads.push(Payload::CompressedData {
                                    latent: z.iter().map(|&v| v as f32).collect(),
                                    fingerprint: enc.fingerprint(),
                                });
                            }
                        }
                    }
                }
            }
        }
        let mut entry = LogEntry {
            record: i,
            source_id: record.source_id().to_string(),
            status,
            score,
            kinds: Vec::with_capacity(payloads.len()),
            seqs: Vec::with_capacity(payloads.len()),
            bytes: 0,
            flops,
            duration_s: record.duration_s(),
        };
        for payload in payloads {
            let msg = WireMessage {
                patient_id: cfg.patient_id,
                seq,
                payload,
            };
            let bytes = encode_message(&msg)?;
            sink.write_all(&bytes)?;
            entry.kinds.push(msg.kind());
            entry.seqs.push(seq);
            entry.bytes += bytes.len();
            seq = seq.wrapping_add(1);
        }
        clock_s += record.duration_s();
        log.total_bytes += entry.bytes;
        log.total_flops += entry.flops;
        log.duration_s += entry.duration_s;
        log.entries.push(entry);
    }
    sink.flush()?;
    let e = &cfg.energy;
    log.tx_energy_j = e.tx_j_per_byte * log.total_bytes as f64;
    log.cpu_energy_j = e.cpu_j_per_flop * log.total_flops as f64;
    log.idle_energy_j = e.idle_w * log.duration_s;
    log.energy_j = log.tx_energy_j + log.cpu_energy_j + log.idle_energy_j;
    log.airtime_s = 8.0 * log.total_bytes as f64 / cfg.link_bps;
    Ok(log)
}

/// Runs the edge node and returns the byte stream with the log.
pub fn run_edge(records: &RecordSet, cfg: &EdgeConfig) -> Result<(Vec<u8>, TransmissionLog)> {
    let mut stream = Vec::new();
    let log = run_edge_into(records, cfg, &mut stream)?;
    Ok((stream, log))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KindCounts {
    pub features: usize,
    pub compressed_data: usize,
    pub full_data: usize,
    pub alert: usize,
}

impl KindCounts {
    fn add(&mut self, kind: Kind) {
        match kind {
            Kind::Features => self.features += 1,
            Kind::CompressedData => self.compressed_data += 1,
            Kind::FullData => self.full_data += 1,
            Kind::Alert => self.alert += 1,
        }
    }

    pub fn get(&self, kind: Kind) -> usize {
        match kind {
            Kind::Features => self.features,
            Kind::CompressedData => self.compressed_data,
            Kind::FullData => self.full_data,
            Kind::Alert => self.alert,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CloudRecord {
    pub index: usize,
    pub status: Option<Status>,
    pub alerted: bool,
    /// Data reconstructed at the cloud: raw samples or decoded code.
    #[serde(skip)]
    pub data: Option<Received>,
    pub prd: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Received {
    Raw(Vec<f64>),
    Decoded(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CloudReport {
    pub counts: KindCounts,
    pub records: usize,
    pub alerts: usize,
    pub per_record: Vec<CloudRecord>,
    /// Fraction of received statuses matching the true labels.
    pub status_accuracy: Option<f64>,
    pub mean_prd: Option<f64>,
    pub max_prd: Option<f64>,
    pub bytes: usize,
}

/// Cloud-side message handler. Feed it messages in stream order.
pub struct CloudSink<'a> {
    decoder: Option<&'a DecoderPart>,
    counts: KindCounts,
    records: Vec<CloudRecord>,
    awaiting_data: bool,
    bytes: usize,
}

impl<'a> CloudSink<'a> {
    pub fn new(decoder: Option<&'a DecoderPart>) -> Self {
        Self {
            decoder,
            counts: KindCounts::default(),
            records: Vec::new(),
            awaiting_data: false,
            bytes: 0,
        }
    }

    fn open_record(&mut self, status: Option<Status>, alerted: bool) -> &mut CloudRecord {
        let index = self.records.len();
        self.records.push(CloudRecord {
            index,
            status,
            alerted,
            data: None,
            prd: None,
        });
        self.records.last_mut().expect("just pushed")
    }

    fn data_record(&mut self) -> &mut CloudRecord {
        if std::mem::take(&mut self.awaiting_data) {
            self.records.last_mut().expect("alert opened a record")
        } else {
            self.open_record(None, false)
        }
    }

    /// Handles one decoded message located at `offset` in the stream.
    pub fn accept(&mut self, msg: WireMessage, offset: usize, frame_len: usize) -> Result<()> {
        self.counts.add(msg.kind());
        self.bytes += frame_len;
        match msg.payload {
            Payload::Features { status, .. } => {
                self.awaiting_data = false;
                self.open_record(Some(status), false);
            }
            Payload::Alert { status, .. } => {
                self.open_record(Some(status), true);
                self.awaiting_data = true;
            }
            Payload::FullData { samples, .. } => {
                let data = samples.into_iter().map(f64::from).collect();
                self.data_record().data = Some(Received::Raw(data));
            }
            Payload::CompressedData { latent, fingerprint } => {
                let dec = self.decoder.ok_or(SimError::MissingDecoder { offset })?;
                if dec.fingerprint() != fingerprint {
                    return Err(SimError::FingerprintMismatch {
                        offset,
                        expected: dec.fingerprint(),
                        got: fingerprint,
                    });
                }
                let z: Vec<f64> = latent.into_iter().map(f64::from).collect();
                let x = dec.decode(&z)?;
                self.data_record().data = Some(Received::Decoded(x));
            }
        }
        Ok(())
    }

    /// Produces the report, scoring against `truth` when supplied.
    pub fn finish(mut self, truth: Option<&RecordSet>) -> Result<CloudReport> {
        let mut status_accuracy = None;
        if let Some(truth) = truth {
            if truth.len() != self.records.len() {
                return Err(SimError::TruthMismatch {
                    received: self.records.len(),
                    truth: truth.len(),
                });
            }
            let mut scored = 0usize;
            let mut correct = 0usize;
            for (rec, t) in self.records.iter_mut().zip(truth.records()) {
                if let Some(status) = rec.status {
                    if let Some(expected) = Status::from_label(t.label()) {
                        scored += 1;
                        correct += usize::from(status == expected);
                    }
                }
                rec.prd = match &rec.data {
                    Some(Received::Raw(x)) => Some(distortion_prd(t.samples(), x)?),
                    Some(Received::Decoded(x)) => Some(distortion_prd(&vectorize(t.samples(), x.len()), x)?),
                    None => None,
                };
            }
            if scored > 0 {
                status_accuracy = Some(correct as f64 / scored as f64);
            }
        }
        let prds: Vec<f64> = self.records.iter().filter_map(|r| r.prd).collect();
        let mean_prd = (!prds.is_empty()).then(|| prds.iter().sum::<f64>() / prds.len() as f64);
        let max_prd = prds.iter().copied().reduce(f64::max);
        Ok(CloudReport {
            counts: self.counts,
            records: self.records.len(),
            alerts: self.counts.alert,
            per_record: self.records,
            status_accuracy,
            mean_prd,
            max_prd,
            bytes: self.bytes,
        })
    }
}

/// Decodes a complete stream at the cloud and builds the report.
pub fn run_cloud(stream: &[u8], decoder: Option<&DecoderPart>, truth: Option<&RecordSet>) -> Result<CloudReport> {
    let mut reader = FrameReader::new();
    reader.push(stream);
    let mut sink = CloudSink::new(decoder);
    loop {
        let offset = reader.offset();
        let before = reader.pending();
        match reader.next_message()? {
            Some(msg) => sink.accept(msg, offset, before - reader.pending())?,
            None => break,
        }
    }
    reader.finish()?;
    sink.finish(truth)
}

/// Hours until the battery is drained at `duty` records per hour. The
/// per-record cost is the active (radio plus compute) energy from the log,
/// re-priced with `params`; idle draw enters once as the constant floor.
pub fn project_lifetime(log: &TransmissionLog, params: &EnergyParams, duty: f64) -> Result<f64> {
    params.validate()?;
    if !(duty.is_finite() && duty > 0.0) {
        return Err(SimError::Config(format!("duty {duty} must be positive")));
    }
    if log.entries.is_empty() {
        return Err(SimError::Config("empty transmission log".into()));
    }
    let active = params.tx_j_per_byte * log.total_bytes as f64 + params.cpu_j_per_flop * log.total_flops as f64;
    let per_record = active / log.entries.len() as f64;
    let avg_power = per_record * duty / 3600.0 + params.idle_w;
    if avg_power <= 0.0 {
        return Err(SimError::ZeroPower);
    }
    Ok(params.battery_j / avg_power / 3600.0)
}

/// Records per hour when records are acquired back to back.
pub fn continuous_duty(records: &RecordSet) -> f64 {
    let total: f64 = records.records().iter().map(TimeSeriesRecord::duration_s).sum();
    3600.0 * records.len() as f64 / total
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transport {
    /// Edge then cloud over an in-memory buffer.
    Memory,
    /// Edge and cloud as concurrent endpoints on a loopback TCP connection.
    Tcp,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationOutcome {
    #[serde(skip)]
    pub stream: Vec<u8>,
    pub log: TransmissionLog,
    pub report: CloudReport,
}

fn cloud_from_reader(
    mut conn: impl Read,
    decoder: Option<&DecoderPart>,
    truth: Option<&RecordSet>,
) -> Result<(Vec<u8>, CloudReport)> {
    let mut reader = FrameReader::new();
    let mut sink = CloudSink::new(decoder);
    let mut received = Vec::new();
    let mut chunk = [0u8; 8192];
    loop {
        let n = conn.read(&mut chunk)?;
        if n == 0 {
            break;
        }
        received.extend_from_slice(&chunk[..n]);
        reader.push(&chunk[..n]);
        loop {
            let offset = reader.offset();
            let before = reader.pending();
            match reader.next_message()? {
                Some(msg) => sink.accept(msg, offset, before - reader.pending())?,
                None => break,
            }
        }
    }
    reader.finish()?;
    Ok((received, sink.finish(truth)?))
}

/// Runs edge and cloud connected by the chosen transport. Both transports
/// produce identical logs, streams and reports.
pub fn simulate(
    records: &RecordSet,
    cfg: &EdgeConfig,
    decoder: Option<&DecoderPart>,
    truth: Option<&RecordSet>,
    transport: Transport,
) -> Result<SimulationOutcome> {
    match transport {
        Transport::Memory => {
            let (stream, log) = run_edge(records, cfg)?;
            let report = run_cloud(&stream, decoder, truth)?;
            Ok(SimulationOutcome { stream, log, report })
        }
        Transport::Tcp => {
            cfg.validate(records)?;
            let listener = TcpListener::bind("127.0.0.1:0")?;
            let addr = listener.local_addr()?;
            thread::scope(|scope| {
                let edge = scope.spawn(move || -> Result<TransmissionLog> {
                    let mut conn = TcpStream::connect(addr)?;
                    let log = run_edge_into(records, cfg, &mut conn)?;
                    conn.shutdown(std::net::Shutdown::Write)?;
                    Ok(log)
                });
                let (conn, _) = listener.accept()?;
                let cloud = cloud_from_reader(conn, decoder, truth);
                let log = edge
                    .join()
                    .map_err(|_| SimError::Config("edge endpoint panicked".into()))??;
                let (stream, report) = cloud?;
                Ok(SimulationOutcome { stream, log, report })
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffc::NormalizationBounds;
    use crate::signal::Label;

    fn records(n: usize, len: usize) -> RecordSet {
        let recs = (0..n)
            .map(|i| {
                let samples = (0..len).map(|t| ((t * (i + 1)) as f64 * 0.1).sin()).collect();
                TimeSeriesRecord::new(samples, 100.0, Label::Normal, format!("r{i}")).unwrap()
            })
            .collect();
        RecordSet::new("t", recs).unwrap()
    }

    fn all_normal_model() -> FfcModel {
        FfcModel::new(
            1.0,
            NormalizationBounds {
                min: [0.0; 5],
                max: [1.0; 5],
            },
        )
        .unwrap()
    }

    #[test]
    fn vectorize_averages_segments() {
        assert_eq!(vectorize(&[1.0, 3.0, 5.0, 7.0], 2), vec![2.0, 6.0]);
        assert_eq!(vectorize(&[1.0, 2.0, 3.0], 3), vec![1.0, 2.0, 3.0]);
        assert_eq!(vectorize(&[0.0, 3.0, 6.0, 9.0, 12.0], 2), vec![1.5, 9.0]);
    }

    #[test]
    fn cdt_without_classifier_is_rejected() {
        let mut cfg = EdgeConfig::cbs();
        cfg.mode = Mode::Cdt;
        assert!(matches!(run_edge(&records(2, 64), &cfg), Err(SimError::Config(_))));
    }

    #[test]
    fn log_totals_match_stream() {
        let recs = records(4, 64);
        let (stream, log) = run_edge(&recs, &EdgeConfig::cdt(all_normal_model())).unwrap();
        assert_eq!(stream.len(), log.total_bytes);
        assert_eq!(log.entries.iter().map(|e| e.bytes).sum::<usize>(), log.total_bytes);
        assert_eq!(log.entries.iter().map(|e| e.flops).sum::<u64>(), log.total_flops);
        let e = EnergyParams::default();
        let expected = e.tx_j_per_byte * log.total_bytes as f64
            + e.cpu_j_per_flop * log.total_flops as f64
            + e.idle_w * log.duration_s;
        assert!((log.energy_j - expected).abs() < 1e-12);
    }

    #[test]
    fn cbs_spends_no_flops() {
        let (_, log) = run_edge(&records(3, 64), &EdgeConfig::cbs()).unwrap();
        assert_eq!(log.total_flops, 0);
        assert!(log
            .entries
            .iter()
            .all(|e| e.status.is_none() && e.kinds == vec![Kind::FullData]));
    }

    #[test]
    fn lifetime_validation() {
        let (_, log) = run_edge(&records(3, 64), &EdgeConfig::cbs()).unwrap();
        let p = EnergyParams::default();
        assert!(project_lifetime(&log, &p, 0.0).is_err());
        let zero = EnergyParams {
            tx_j_per_byte: 0.0,
            cpu_j_per_flop: 0.0,
            idle_w: 0.0,
            battery_j: 1.0,
        };
        assert!(matches!(project_lifetime(&log, &zero, 10.0), Err(SimError::ZeroPower)));
    }

    #[test]
    fn compressed_mode_checks_encoder_dimension() {
        let model = crate::sae::init_sae(&[128, 16], crate::sae::Activation::Tanh, 0, 1.0).unwrap();
        let (enc, _) = model.split();
        let mut cfg = EdgeConfig::cdt(all_normal_model());
        cfg.emergency_payload = EmergencyPayload::Compressed;
        assert!(run_edge(&records(2, 64), &cfg).is_err());
        cfg.encoder = Some(enc);
        let mut out = Vec::new();
        assert!(matches!(
            run_edge_into(&records(2, 64), &cfg, &mut out),
            Err(SimError::Config(_))
        ));
        assert!(out.is_empty());
        assert!(run_edge(&records(2, 256), &cfg).is_ok());
    }
}
