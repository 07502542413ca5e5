//! Edge-to-cloud message envelope.
//!
//! Every frame is little-endian:
//!
//! ```text
//! offset  size  field
//!      0     2  magic "SH" (0x53 0x48)
//!      2     1  version (1)
//!      3     1  kind (1 features, 2 compressed, 3 full data, 4 alert)
//!      4     4  patient id
//!      8     4  sequence number
//!     12     4  payload length
//!     16     n  payload
//!   16+n     4  CRC-32 (IEEE) over bytes 0..16+n
//! ```
//!
//! Payloads:
//!
//! * features: five f32 normalized features, f32 score, u8 status
//! * compressed: u16 dim, `dim` f32 latent values, u64 model fingerprint
//! * full data: u32 sample count, f32 rate in Hz, `count` f32 samples
//! * alert: u8 status, f32 score, u64 unix time in milliseconds
//!
//! The CRC guards against corruption only; there is no authentication.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ffc::Status;

pub const MAGIC: [u8; 2] = [0x53, 0x48];
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 16;
pub const CRC_LEN: usize = 4;
/// Smallest possible frame: header, empty payload, CRC.
pub const MIN_FRAME_LEN: usize = HEADER_LEN + CRC_LEN;

pub const FEATURES_PAYLOAD_LEN: usize = 5 * 4 + 4 + 1;
pub const ALERT_PAYLOAD_LEN: usize = 1 + 4 + 8;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum WireError {
    #[error("bad magic bytes")]
    Framing,
    #[error("unsupported protocol version {0}")]
    Version(u8),
    #[error("CRC mismatch: frame carries {stored:#010x}, computed {computed:#010x}")]
    Integrity { stored: u32, computed: u32 },
    #[error("need {expected_total} bytes to decode the frame")]
    NeedMoreBytes { expected_total: usize },
    #[error("malformed frame: {0}")]
    Malformed(String),
    #[error("message cannot be encoded: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, WireError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Features,
    CompressedData,
    FullData,
    Alert,
}

impl Kind {
    pub fn code(self) -> u8 {
        match self {
            Kind::Features => 1,
            Kind::CompressedData => 2,
            Kind::FullData => 3,
            Kind::Alert => 4,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            1 => Some(Kind::Features),
            2 => Some(Kind::CompressedData),
            3 => Some(Kind::FullData),
            4 => Some(Kind::Alert),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    Features {
        features: [f32; 5],
        score: f32,
        status: Status,
    },
    CompressedData {
        latent: Vec<f32>,
        fingerprint: u64,
    },
    FullData {
        rate_hz: f32,
        samples: Vec<f32>,
    },
    Alert {
        status: Status,
        score: f32,
        unix_millis: u64,
    },
}

impl Payload {
    pub fn kind(&self) -> Kind {
        match self {
            Payload::Features { .. } => Kind::Features,
            Payload::CompressedData { .. } => Kind::CompressedData,
            Payload::FullData { .. } => Kind::FullData,
            Payload::Alert { .. } => Kind::Alert,
        }
    }

    pub fn encoded_len(&self) -> usize {
        match self {
            Payload::Features { .. } => FEATURES_PAYLOAD_LEN,
            Payload::CompressedData { latent, .. } => 2 + 4 * latent.len() + 8,
            Payload::FullData { samples, .. } => 4 + 4 + 4 * samples.len(),
            Payload::Alert { .. } => ALERT_PAYLOAD_LEN,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WireMessage {
    pub patient_id: u32,
    pub seq: u32,
    pub payload: Payload,
}

impl WireMessage {
    pub fn kind(&self) -> Kind {
        self.payload.kind()
    }

    /// Size of the encoded frame in bytes.
    pub fn encoded_len(&self) -> usize {
        HEADER_LEN + self.payload.encoded_len() + CRC_LEN
    }
}

/// Frame size of a features message.
pub const fn features_frame_len() -> usize {
    HEADER_LEN + FEATURES_PAYLOAD_LEN + CRC_LEN
}

/// Frame size of an alert message.
pub const fn alert_frame_len() -> usize {
    HEADER_LEN + ALERT_PAYLOAD_LEN + CRC_LEN
}

/// Frame size of a full-data message carrying `n_samples` samples.
pub const fn full_data_frame_len(n_samples: usize) -> usize {
    HEADER_LEN + 8 + 4 * n_samples + CRC_LEN
}

/// Frame size of a compressed-data message with a `dim`-long code.
pub const fn compressed_frame_len(dim: usize) -> usize {
    HEADER_LEN + 2 + 4 * dim + 8 + CRC_LEN
}

fn put_f32s(out: &mut Vec<u8>, values: &[f32]) {
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

pub fn encode_message(msg: &WireMessage) -> Result<Vec<u8>> {
    let payload_len = msg.payload.encoded_len();
    let payload_len_u32 = u32::try_from(payload_len)
        .map_err(|_| WireError::Invalid(format!("payload of {payload_len} bytes exceeds the u32 length field")))?;
    let mut out = Vec::with_capacity(msg.encoded_len());
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.push(msg.kind().code());
    out.extend_from_slice(&msg.patient_id.to_le_bytes());
    out.extend_from_slice(&msg.seq.to_le_bytes());
    out.extend_from_slice(&payload_len_u32.to_le_bytes());
    match &msg.payload {
        Payload::Features {
            features,
            score,
            status,
        } => {
            put_f32s(&mut out, features);
            out.extend_from_slice(&score.to_le_bytes());
            out.push(status.code());
        }
        Payload::CompressedData { latent, fingerprint } => {
            let dim = u16::try_from(latent.len())
                .ok()
                .filter(|&d| d >= 1)
                .ok_or_else(|| WireError::Invalid(format!("latent dimension {} outside 1..=65535", latent.len())))?;
            out.extend_from_slice(&dim.to_le_bytes());
            put_f32s(&mut out, latent);
            out.extend_from_slice(&fingerprint.to_le_bytes());
        }
        Payload::FullData { rate_hz, samples } => {
            let n = u32::try_from(samples.len())
                .ok()
                .filter(|&n| n >= 1)
                .ok_or_else(|| WireError::Invalid(format!("sample count {} outside 1..=u32::MAX", samples.len())))?;
            out.extend_from_slice(&n.to_le_bytes());
            out.extend_from_slice(&rate_hz.to_le_bytes());
            put_f32s(&mut out, samples);
        }
        Payload::Alert {
            status,
            score,
            unix_millis,
        } => {
            out.push(status.code());
            out.extend_from_slice(&score.to_le_bytes());
            out.extend_from_slice(&unix_millis.to_le_bytes());
        }
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    Ok(out)
}

fn le_u32(b: &[u8]) -> u32 {
    u32::from_le_bytes(b[..4].try_into().expect("4 bytes"))
}

fn le_f32s(b: &[u8]) -> Vec<f32> {
    b.chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
        .collect()
}

fn status_byte(b: u8) -> Result<Status> {
    Status::from_code(b).ok_or_else(|| WireError::Malformed(format!("status byte {b}")))
}

fn decode_payload(kind: Kind, p: &[u8]) -> Result<Payload> {
    let expect = |len: usize| {
        if p.len() == len {
            Ok(())
        } else {
            Err(WireError::Malformed(format!(
                "{kind:?} payload is {} bytes, expected {len}",
                p.len()
            )))
        }
    };
    match kind {
        Kind::Features => {
            expect(FEATURES_PAYLOAD_LEN)?;
            let v = le_f32s(&p[..24]);
            Ok(Payload::Features {
                features: [v[0], v[1], v[2], v[3], v[4]],
                score: v[5],
                status: status_byte(p[24])?,
            })
        }
        Kind::CompressedData => {
            if p.len() < 2 {
                return Err(WireError::Malformed(
                    "compressed payload shorter than its dimension field".into(),
                ));
            }
            let dim = u16::from_le_bytes([p[0], p[1]]) as usize;
            if dim == 0 {
                return Err(WireError::Malformed("latent dimension 0".into()));
            }
            expect(2 + 4 * dim + 8)?;
            Ok(Payload::CompressedData {
                latent: le_f32s(&p[2..2 + 4 * dim]),
                fingerprint: u64::from_le_bytes(p[2 + 4 * dim..].try_into().expect("8 bytes")),
            })
        }
        Kind::FullData => {
            if p.len() < 8 {
                return Err(WireError::Malformed(
                    "full-data payload shorter than its fixed fields".into(),
                ));
            }
            let n = le_u32(p) as usize;
            if n == 0 {
                return Err(WireError::Malformed("sample count 0".into()));
            }
            expect(8 + 4 * n)?;
            Ok(Payload::FullData {
                rate_hz: f32::from_le_bytes(p[4..8].try_into().expect("4 bytes")),
                samples: le_f32s(&p[8..]),
            })
        }
        Kind::Alert => {
            expect(ALERT_PAYLOAD_LEN)?;
            Ok(Payload::Alert {
                status: status_byte(p[0])?,
                score: f32::from_le_bytes(p[1..5].try_into().expect("4 bytes")),
                unix_millis: u64::from_le_bytes(p[5..13].try_into().expect("8 bytes")),
            })
        }
    }
}

/// Decodes the frame at the start of `bytes`, returning the message and the
/// number of bytes it occupied.
///
/// A short buffer yields [`WireError::NeedMoreBytes`] with the total frame
/// length once the length field is readable (the minimum frame length
/// before that), so callers can tell truncation from corruption.
pub fn decode_message(bytes: &[u8]) -> Result<(WireMessage, usize)> {
    let have_magic = bytes.len().min(2);
    if bytes[..have_magic] != MAGIC[..have_magic] {
        return Err(WireError::Framing);
    }
    if bytes.len() > 2 && bytes[2] != VERSION {
        return Err(WireError::Version(bytes[2]));
    }
    if bytes.len() < HEADER_LEN {
        return Err(WireError::NeedMoreBytes {
            expected_total: MIN_FRAME_LEN,
        });
    }
    let payload_len = le_u32(&bytes[12..16]) as usize;
    let total = HEADER_LEN
        .checked_add(payload_len)
        .and_then(|t| t.checked_add(CRC_LEN))
        .ok_or_else(|| WireError::Malformed("payload length overflows".into()))?;
    if bytes.len() < total {
        return Err(WireError::NeedMoreBytes { expected_total: total });
    }
    let body = &bytes[..HEADER_LEN + payload_len];
    let stored = le_u32(&bytes[HEADER_LEN + payload_len..total]);
    let computed = crc32fast::hash(body);
    if stored != computed {
        return Err(WireError::Integrity { stored, computed });
    }
    let kind = Kind::from_code(bytes[3]).ok_or_else(|| WireError::Malformed(format!("unknown kind {}", bytes[3])))?;
    let payload = decode_payload(kind, &body[HEADER_LEN..])?;
    Ok((
        WireMessage {
            patient_id: le_u32(&bytes[4..8]),
            seq: le_u32(&bytes[8..12]),
            payload,
        },
        total,
    ))
}

/// Encodes a sequence of messages back to back.
pub fn encode_stream<'a>(messages: impl IntoIterator<Item = &'a WireMessage>) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for m in messages {
        out.extend(encode_message(m)?);
    }
    Ok(out)
}

/// A decode failure located in a byte stream.
#[derive(Debug, Error, PartialEq, Eq, Clone)]
#[error("at byte offset {offset}: {error}")]
pub struct StreamError {
    pub offset: usize,
    #[source]
    pub error: WireError,
}

/// Decodes a complete stream; a trailing partial frame is an error.
pub fn decode_stream(bytes: &[u8]) -> std::result::Result<Vec<WireMessage>, StreamError> {
    let mut out = Vec::new();
    let mut offset = 0;
    while offset < bytes.len() {
        let (msg, used) = decode_message(&bytes[offset..]).map_err(|error| StreamError { offset, error })?;
        out.push(msg);
        offset += used;
    }
    Ok(out)
}

/// Incremental decoder for one connection: feed bytes as they arrive and
/// pull complete messages out.
#[derive(Debug, Default)]
pub struct FrameReader {
    buf: Vec<u8>,
    consumed: usize,
}

impl FrameReader {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, bytes: &[u8]) {
        self.buf.extend_from_slice(bytes);
    }

    /// Offset in the overall stream of the next undecoded byte.
    pub fn offset(&self) -> usize {
        self.consumed
    }

    /// Bytes received but not yet decoded.
    pub fn pending(&self) -> usize {
        self.buf.len()
    }

    /// Next complete message, `Ok(None)` when more bytes are needed.
    pub fn next_message(&mut self) -> std::result::Result<Option<WireMessage>, StreamError> {
        if self.buf.is_empty() {
            return Ok(None);
        }
        match decode_message(&self.buf) {
            Ok((msg, used)) => {
                self.buf.drain(..used);
                self.consumed += used;
                Ok(Some(msg))
            }
            Err(WireError::NeedMoreBytes { .. }) => Ok(None),
            Err(error) => Err(StreamError {
                offset: self.consumed,
                error,
            }),
        }
    }

    /// Fails if a partial frame is left over at end of stream.
    pub fn finish(&self) -> std::result::Result<(), StreamError> {
        if self.buf.is_empty() {
            return Ok(());
        }
        let error = match decode_message(&self.buf) {
            Err(e) => e,
            Ok(_) => WireError::Malformed("undecoded frame left in buffer".into()),
        };
        Err(StreamError {
            offset: self.consumed,
            error,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn features() -> WireMessage {
        WireMessage {
            patient_id: 7,
            seq: 1,
            payload: Payload::Features {
                features: [0.1, 0.2, 0.3, 0.4, 0.5],
                score: 0.3,
                status: Status::Normal,
            },
        }
    }

    #[test]
    fn frame_sizes() {
        let bytes = encode_message(&features()).unwrap();
        assert_eq!(bytes.len(), features_frame_len());
        assert_eq!(bytes.len(), HEADER_LEN + 25 + CRC_LEN);
        let full = WireMessage {
            patient_id: 1,
            seq: 2,
            payload: Payload::FullData {
                rate_hz: 173.61,
                samples: vec![0.0; 4097],
            },
        };
        assert_eq!(encode_message(&full).unwrap().len(), full_data_frame_len(4097));
        assert_eq!(full_data_frame_len(4097), 16 + 8 + 4 * 4097 + 4);
    }

    #[test]
    fn header_layout() {
        let alert = WireMessage {
            patient_id: 0x0102_0304,
            seq: 9,
            payload: Payload::Alert {
                status: Status::Seizure,
                score: 0.75,
                unix_millis: 1_700_000_000_000,
            },
        };
        let b = encode_message(&alert).unwrap();
        assert_eq!(&b[..4], &[0x53, 0x48, 1, 4]);
        assert_eq!(&b[4..8], &[4, 3, 2, 1]);
        assert_eq!(le_u32(&b[12..16]) as usize, ALERT_PAYLOAD_LEN);
        assert_eq!(b.len(), alert_frame_len());
    }

    #[test]
    fn flipped_payload_byte_fails_integrity() {
        let mut b = encode_message(&features()).unwrap();
        b[HEADER_LEN + 3] ^= 0xff;
        assert!(matches!(decode_message(&b), Err(WireError::Integrity { .. })));
    }

    #[test]
    fn short_prefix_needs_more_bytes() {
        let b = encode_message(&features()).unwrap();
        assert_eq!(
            decode_message(&b[..10]),
            Err(WireError::NeedMoreBytes {
                expected_total: MIN_FRAME_LEN
            })
        );
        assert_eq!(
            decode_message(&b[..20]),
            Err(WireError::NeedMoreBytes {
                expected_total: b.len()
            })
        );
        assert_eq!(
            decode_message(&b[..1]),
            Err(WireError::NeedMoreBytes {
                expected_total: MIN_FRAME_LEN
            })
        );
    }

    #[test]
    fn bad_magic_and_version() {
        let mut b = encode_message(&features()).unwrap();
        b[0] = b'X';
        assert_eq!(decode_message(&b), Err(WireError::Framing));
        let mut b = encode_message(&features()).unwrap();
        b[2] = 2;
        assert_eq!(decode_message(&b), Err(WireError::Version(2)));
    }

    #[test]
    fn zero_length_vectors_are_not_encodable() {
        let m = WireMessage {
            patient_id: 0,
            seq: 0,
            payload: Payload::FullData {
                rate_hz: 1.0,
                samples: vec![],
            },
        };
        assert!(matches!(encode_message(&m), Err(WireError::Invalid(_))));
        let m = WireMessage {
            patient_id: 0,
            seq: 0,
            payload: Payload::CompressedData {
                latent: vec![],
                fingerprint: 0,
            },
        };
        assert!(matches!(encode_message(&m), Err(WireError::Invalid(_))));
    }

    #[test]
    fn concatenated_frames_report_consumed_length() {
        let a = features();
        let mut b = features();
        b.seq = 2;
        let stream = encode_stream([&a, &b]).unwrap();
        let (first, used) = decode_message(&stream).unwrap();
        assert_eq!(first, a);
        assert_eq!(used, features_frame_len());
        let (second, _) = decode_message(&stream[used..]).unwrap();
        assert_eq!(second, b);
    }

    #[test]
    fn frame_reader_handles_byte_at_a_time_delivery() {
        let msgs = vec![features(), features()];
        let stream = encode_stream(&msgs).unwrap();
        let mut reader = FrameReader::new();
        let mut out = Vec::new();
        for byte in &stream {
            reader.push(std::slice::from_ref(byte));
            while let Some(m) = reader.next_message().unwrap() {
                out.push(m);
            }
        }
        reader.finish().unwrap();
        assert_eq!(out, msgs);
        assert_eq!(reader.offset(), stream.len());
    }

    #[test]
    fn truncated_stream_reports_offset() {
        let msgs = vec![features(), features()];
        let stream = encode_stream(&msgs).unwrap();
        let err = decode_stream(&stream[..stream.len() - 3]).unwrap_err();
        assert_eq!(err.offset, features_frame_len());
        assert!(matches!(err.error, WireError::NeedMoreBytes { .. }));
    }
}
