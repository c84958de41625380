//! 40-byte little-endian telemetry frame.
//!
//! ```text
//! 0..2    magic "GL"
//! 2..6    u32 sequence
//! 6..14   f64 sender timestamp, s
//! 14..38  6 x f32 joint angles, rad
//! 38..40  Fletcher-16 over bytes 0..38
//! ```

use thiserror::Error;

use crate::joint::{JointVector, NUM_JOINTS};

pub const FRAME_LEN: usize = 40;
pub const MAGIC: [u8; 2] = *b"GL";
const BODY_LEN: usize = FRAME_LEN - 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("expected {FRAME_LEN} bytes, got {0}")]
    Length(usize),
    #[error("bad magic {0:02x?}")]
    Magic([u8; 2]),
    #[error("checksum mismatch (computed {computed:#06x}, stored {stored:#06x})")]
    Checksum { computed: u16, stored: u16 },
    #[error("non-finite field")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleFrame {
    pub sequence: u32,
    /// Sender clock, s.
    pub timestamp: f64,
    pub angles: [f32; NUM_JOINTS],
}

impl AngleFrame {
    pub fn new(sequence: u32, timestamp: f64, angles: &JointVector) -> Self {
        AngleFrame {
            sequence,
            timestamp,
            angles: angles.0.map(|a| a as f32),
        }
    }

    pub fn joint_angles(&self) -> JointVector {
        JointVector(self.angles.map(f64::from))
    }
}

pub fn fletcher16(data: &[u8]) -> u16 {
    let (mut a, mut b) = (0u16, 0u16);
    for &byte in data {
        a = (a + u16::from(byte)) % 255;
        b = (b + a) % 255;
    }
    (b << 8) | a
}

pub fn encode_frame(frame: &AngleFrame) -> [u8; FRAME_LEN] {
    let mut out = [0u8; FRAME_LEN];
    out[0..2].copy_from_slice(&MAGIC);
    out[2..6].copy_from_slice(&frame.sequence.to_le_bytes());
    out[6..14].copy_from_slice(&frame.timestamp.to_le_bytes());
    for (i, a) in frame.angles.iter().enumerate() {
        let o = 14 + 4 * i;
        out[o..o + 4].copy_from_slice(&a.to_le_bytes());
    }
    let sum = fletcher16(&out[..BODY_LEN]);
    out[BODY_LEN..].copy_from_slice(&sum.to_le_bytes());
    out
}

pub fn decode_frame(bytes: &[u8]) -> Result<AngleFrame, DecodeError> {
    if bytes.len() != FRAME_LEN {
        return Err(DecodeError::Length(bytes.len()));
    }
    if bytes[0..2] != MAGIC {
        return Err(DecodeError::Magic([bytes[0], bytes[1]]));
    }
    let stored = u16::from_le_bytes([bytes[BODY_LEN], bytes[BODY_LEN + 1]]);
    let computed = fletcher16(&bytes[..BODY_LEN]);
    if stored != computed {
        return Err(DecodeError::Checksum { computed, stored });
    }
    let word = |o: usize| -> [u8; 4] { bytes[o..o + 4].try_into().expect("4-byte slice") };
    let sequence = u32::from_le_bytes(word(2));
    let timestamp = f64::from_le_bytes(bytes[6..14].try_into().expect("8-byte slice"));
    let angles: [f32; NUM_JOINTS] = std::array::from_fn(|i| f32::from_le_bytes(word(14 + 4 * i)));
    if !timestamp.is_finite() || angles.iter().any(|a| !a.is_finite()) {
        return Err(DecodeError::NonFinite);
    }
    Ok(AngleFrame {
        sequence,
        timestamp,
        angles,
    })
}
