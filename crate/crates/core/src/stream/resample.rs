use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::joint::JointVector;
use crate::stream::frame::AngleFrame;

/// Frames older than this trigger the transparent fallback, s.
pub const STALE_AFTER: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resampled {
    pub angles: JointVector,
    pub sequence: u32,
    pub timestamp: f64,
    /// Controller time minus sender timestamp, s.
    pub age: f64,
    pub stale: bool,
}

/// Receive-side store keyed by sequence number. Arrival order is irrelevant:
/// the newest eligible sequence always wins and consumption never goes back.
#[derive(Debug, Clone, Default)]
pub struct FrameBuffer {
    frames: BTreeMap<u32, AngleFrame>,
    last_used: Option<AngleFrame>,
}

impl FrameBuffer {
    pub fn new() -> Self {
        FrameBuffer::default()
    }

    pub fn push(&mut self, frame: AngleFrame) {
        if self.last_used.is_some_and(|u| frame.sequence <= u.sequence) {
            return;
        }
        self.frames.insert(frame.sequence, frame);
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty() && self.last_used.is_none()
    }

    pub fn last_used(&self) -> Option<&AngleFrame> {
        self.last_used.as_ref()
    }

    /// Zero-order hold of the newest frame stamped at or before `t_ctrl - budget`.
    pub fn resample_latest(&mut self, t_ctrl: f64, budget: f64) -> Result<Resampled> {
        let horizon = t_ctrl - budget;
        let newest = self
            .frames
            .values()
            .rev()
            .find(|f| f.timestamp <= horizon)
            .copied();
        if let Some(f) = newest {
            self.frames = self.frames.split_off(&f.sequence);
            self.frames.remove(&f.sequence);
            self.last_used = Some(f);
        }
        let f = self.last_used.ok_or(Error::NoData)?;
        let age = t_ctrl - f.timestamp;
        Ok(Resampled {
            angles: f.joint_angles(),
            sequence: f.sequence,
            timestamp: f.timestamp,
            age,
            stale: age > STALE_AFTER,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(seq: u32) -> AngleFrame {
        AngleFrame::new(seq, seq as f64 * 0.005, &JointVector::splat(seq as f64 * 0.01))
    }

    #[test]
    fn empty_is_no_data() {
        let mut b = FrameBuffer::new();
        assert!(matches!(b.resample_latest(1.0, 0.0), Err(Error::NoData)));
    }

    #[test]
    fn every_other_frame_at_control_rate() {
        let mut b = FrameBuffer::new();
        let mut used = Vec::new();
        for tick in 1..=50u32 {
            b.push(frame(2 * tick - 1));
            b.push(frame(2 * tick));
            let r = b.resample_latest(tick as f64 * 0.01, 0.0).unwrap();
            assert!(r.age <= 0.005 + 1e-12);
            used.push(r.sequence);
        }
        assert_eq!(used, (1..=50).map(|t| 2 * t).collect::<Vec<_>>());
    }

    #[test]
    fn order_within_batch_is_irrelevant() {
        let mut a = FrameBuffer::new();
        let mut b = FrameBuffer::new();
        for tick in 1..=20u32 {
            let batch = [frame(3 * tick - 2), frame(3 * tick - 1), frame(3 * tick)];
            for f in batch {
                a.push(f);
            }
            for f in batch.iter().rev() {
                b.push(*f);
            }
            let t = tick as f64 * 0.015;
            assert_eq!(a.resample_latest(t, 0.004).unwrap(), b.resample_latest(t, 0.004).unwrap());
        }
    }

    #[test]
    fn late_old_frame_is_not_consumed() {
        let mut b = FrameBuffer::new();
        b.push(frame(10));
        assert_eq!(b.resample_latest(1.0, 0.0).unwrap().sequence, 10);
        b.push(frame(9));
        assert_eq!(b.resample_latest(1.0, 0.0).unwrap().sequence, 10);
    }

    #[test]
    fn goes_stale_after_threshold() {
        let mut b = FrameBuffer::new();
        b.push(frame(0));
        assert!(!b.resample_latest(0.1, 0.0).unwrap().stale);
        assert!(b.resample_latest(0.11, 0.0).unwrap().stale);
    }
}
