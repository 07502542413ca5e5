//! Single-sided magnitude spectra and the five frequency features.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read};

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::signal::{Label, SignalWindow};

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("sample {0} is not finite")]
    NonFinite(usize),
    #[error("invalid band {lo}..{hi} Hz: {reason}")]
    InvalidBand { lo: f64, hi: f64, reason: String },
    #[error("band {lo}..{hi} Hz contains no spectral bins")]
    EmptyBand { lo: f64, hi: f64 },
    #[error("feature table line {line}: {reason}")]
    Table { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SpectralError>;

/// Analysis band in Hz, inclusive at both edges.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

impl Band {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, f: f64) -> bool {
        f >= self.lo && f <= self.hi
    }
}

impl Default for Band {
    /// Clinical EEG content, 0.5-40 Hz.
    fn default() -> Self {
        Self { lo: 0.5, hi: 40.0 }
    }
}

/// Single-sided amplitude spectrum without the DC bin: `magnitudes[i]`
/// belongs to frequency `(i + 1) * bin_hz`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    magnitudes: Vec<f64>,
    bin_hz: f64,
    rate: f64,
}

impl Spectrum {
    /// Wraps precomputed magnitudes. `bin_hz` must equal `rate / N` for the
    /// window length `N` the magnitudes came from.
    pub fn from_magnitudes(magnitudes: Vec<f64>, bin_hz: f64, rate: f64) -> Result<Self> {
        if let Some(i) = magnitudes.iter().position(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(SpectralError::NonFinite(i));
        }
        Ok(Self {
            magnitudes,
            bin_hz,
            rate,
        })
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    pub fn bin_hz(&self) -> f64 {
        self.bin_hz
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// Frequency of `magnitudes[i]`.
    pub fn frequency(&self, i: usize) -> f64 {
        (i + 1) as f64 * self.bin_hz
    }

    /// The band spanning every reported bin.
    pub fn full_band(&self) -> Band {
        Band::new(self.bin_hz, self.rate / 2.0)
    }
}

/// Mean-removed DFT of the window, reported as `2/N * |X[k]|` for
/// `k = 1..=N/2`.
pub fn magnitude_spectrum(window: &SignalWindow<'_>) -> Result<Spectrum> {
    magnitude_spectrum_of(window.samples(), window.rate())
}

pub fn magnitude_spectrum_of(samples: &[f64], rate: f64) -> Result<Spectrum> {
    if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
        return Err(SpectralError::NonFinite(i));
    }
    let n = samples.len();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex<f64>> = samples.iter().map(|&s| Complex::new(s - mean, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = 2.0 / n as f64;
    let magnitudes = buf[1..=n / 2].iter().map(|c| scale * c.norm()).collect();
    Ok(Spectrum {
        magnitudes,
        bin_hz: rate / n as f64,
        rate,
    })
}

/// The five frequency features of one window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub mu: f64,
    pub med: f64,
    pub peak: f64,
    pub rms: f64,
    pub energy: f64,
    pub band: Band,
}

impl FeatureVector {
    pub const NAMES: [&'static str; 5] = ["mu", "med", "peak", "rms", "energy"];

    /// `[mu, med, peak, rms, energy]`.
    pub fn to_array(&self) -> [f64; 5] {
        [self.mu, self.med, self.peak, self.rms, self.energy]
    }

    pub fn from_array(values: [f64; 5], band: Band) -> Self {
        let [mu, med, peak, rms, energy] = values;
        Self {
            mu,
            med,
            peak,
            rms,
            energy,
            band,
        }
    }

    /// Multiplies every feature by `factor` (energy included, as a value).
    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_array(self.to_array().map(|v| v * factor), self.band)
    }
}

fn median(sorted: &[f64]) -> f64 {
    let k = sorted.len();
    if k % 2 == 1 {
        sorted[k / 2]
    } else {
        0.5 * (sorted[k / 2 - 1] + sorted[k / 2])
    }
}

/// Number of spectral bins falling in `band`, and their index range.
pub fn band_bins(spectrum: &Spectrum, band: Band) -> Result<std::ops::Range<usize>> {
    if !(band.lo.is_finite() && band.hi.is_finite()) || band.lo < 0.0 || band.lo >= band.hi {
        return Err(SpectralError::InvalidBand {
            lo: band.lo,
            hi: band.hi,
            reason: "expected 0 <= lo < hi".into(),
        });
    }
    if band.hi > spectrum.rate / 2.0 * (1.0 + 1e-12) {
        return Err(SpectralError::InvalidBand {
            lo: band.lo,
            hi: band.hi,
            reason: format!("upper edge exceeds the Nyquist frequency {}", spectrum.rate / 2.0),
        });
    }
    let first = (0..spectrum.magnitudes.len()).find(|&i| band.contains(spectrum.frequency(i)));
    let Some(first) = first else {
        return Err(SpectralError::EmptyBand {
            lo: band.lo,
            hi: band.hi,
        });
    };
    let end = (first..spectrum.magnitudes.len())
        .find(|&i| !band.contains(spectrum.frequency(i)))
        .unwrap_or(spectrum.magnitudes.len());
    Ok(first..end)
}

/// Mean, median, peak, RMS and energy of the in-band magnitudes.
pub fn extract_ff(spectrum: &Spectrum, band: Band) -> Result<FeatureVector> {
    let range = band_bins(spectrum, band)?;
    let in_band = &spectrum.magnitudes[range];
    let k = in_band.len() as f64;
    let mut sorted = in_band.to_vec();
    sorted.sort_by(f64::total_cmp);
    let energy: f64 = in_band.iter().map(|a| a * a).sum();
    Ok(FeatureVector {
        mu: in_band.iter().sum::<f64>() / k,
        med: median(&sorted),
        peak: sorted[sorted.len() - 1],
        rms: (energy / k).sqrt(),
        energy,
        band,
    })
}

/// Spectrum plus feature extraction for a window.
pub fn window_features(window: &SignalWindow<'_>, band: Band) -> Result<FeatureVector> {
    extract_ff(&magnitude_spectrum(window)?, band)
}

/// One row of an exported feature table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub source_id: String,
    pub label: Label,
    pub features: FeatureVector,
}

pub const FEATURE_TABLE_HEADER: &str = "source_id,label,mu,med,peak,rms,energy";

fn sig9(v: f64) -> String {
    format!("{v:.8e}")
}

/// Comma-separated feature table with a header line; values carry nine
/// significant digits.
pub fn write_feature_table(rows: &[FeatureRow]) -> String {
    let mut out = String::new();
    out.push_str(FEATURE_TABLE_HEADER);
    out.push('\n');
    for row in rows {
        let f = row.features.to_array();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            row.source_id,
            row.label,
            sig9(f[0]),
            sig9(f[1]),
            sig9(f[2]),
            sig9(f[3]),
            sig9(f[4])
        );
    }
    out
}

/// Parses a table produced by [`write_feature_table`]. The band is not part
/// of the table and is supplied by the caller.
pub fn read_feature_table(reader: impl Read, band: Band) -> Result<Vec<FeatureRow>> {
    let mut rows = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || (i == 0 && line == FEATURE_TABLE_HEADER) {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(SpectralError::Table {
                line: i + 1,
                reason: format!("expected 7 fields, found {}", fields.len()),
            });
        }
        let label = fields[1].parse::<Label>().map_err(|e| SpectralError::Table {
            line: i + 1,
            reason: e.to_string(),
        })?;
        let mut values = [0.0; 5];
        for (v, text) in values.iter_mut().zip(&fields[2..]) {
            *v = text.parse().map_err(|_| SpectralError::Table {
                line: i + 1,
                reason: format!("bad number {text:?}"),
            })?;
        }
        rows.push(FeatureRow {
            source_id: fields[0].to_string(),
            label,
            features: FeatureVector::from_array(values, band),
        });
    }
    Ok(rows)
}
