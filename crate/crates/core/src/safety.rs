//! Range-of-motion clamp on commanded angles and slew-rate limit on desired
//! interaction torque.
//!
//! Sign convention: hip and knee flexion positive, ankle dorsiflexion positive.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::joint::{JointKind, JointVector, NUM_JOINTS};

/// Default torque slew bound, Nm/s.
pub const DEFAULT_MAX_TORQUE_RATE: f64 = 200.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RomLimits {
    /// Lower bound per joint, rad.
    pub min: JointVector,
    /// Upper bound per joint, rad.
    pub max: JointVector,
}

impl Default for RomLimits {
    /// Hip 30 deg extension / 105 deg flexion, knee 5 deg extension / 105 deg
    /// flexion, ankle 30 deg plantar- and dorsiflexion.
    fn default() -> Self {
        let lim = |kind: JointKind| -> (f64, f64) {
            match kind {
                JointKind::Hip => (-30.0, 105.0),
                JointKind::Knee => (-5.0, 105.0),
                JointKind::Ankle => (-30.0, 30.0),
            }
        };
        let (h, k, a) = (lim(JointKind::Hip), lim(JointKind::Knee), lim(JointKind::Ankle));
        RomLimits {
            min: JointVector::symmetric(h.0, k.0, a.0).map(f64::to_radians),
            max: JointVector::symmetric(h.1, k.1, a.1).map(f64::to_radians),
        }
    }
}

impl RomLimits {
    pub fn validate(&self) -> Result<()> {
        for i in 0..NUM_JOINTS {
            if !(self.min[i].is_finite() && self.max[i].is_finite() && self.min[i] < self.max[i]) {
                return Err(Error::param(
                    "rom",
                    format!("joint {i}: need min < max, got [{}, {}]", self.min[i], self.max[i]),
                ));
            }
        }
        Ok(())
    }

    pub fn contains(&self, theta: &JointVector) -> bool {
        (0..NUM_JOINTS).all(|i| theta[i] >= self.min[i] && theta[i] <= self.max[i])
    }
}

/// Clamps each joint into its range. Idempotent and order-preserving.
pub fn clamp_rom(theta_des: &JointVector, limits: &RomLimits) -> JointVector {
    JointVector::from_fn(|i| theta_des[i].clamp(limits.min[i], limits.max[i]))
}

/// Per-joint torque slew limiter.
#[derive(Debug, Clone, PartialEq)]
pub struct RateLimiter {
    previous: Option<JointVector>,
    max_rate: f64,
    sample_rate: f64,
}

impl RateLimiter {
    pub fn new(max_rate: f64, sample_rate: f64) -> Result<Self> {
        if !(max_rate.is_finite() && max_rate > 0.0) {
            return Err(Error::param("max_rate", format!("must be > 0, got {max_rate}")));
        }
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::param("sample_rate", format!("must be > 0, got {sample_rate}")));
        }
        Ok(RateLimiter {
            previous: None,
            max_rate,
            sample_rate,
        })
    }

    pub fn max_rate(&self) -> f64 {
        self.max_rate
    }

    /// Largest change allowed between consecutive samples.
    pub fn max_step(&self) -> f64 {
        self.max_rate / self.sample_rate
    }

    pub fn previous(&self) -> Option<JointVector> {
        self.previous
    }

    pub fn reset(&mut self) {
        self.previous = None;
    }

    /// The first call passes the request through and seeds the state.
    pub fn rate_limit(&mut self, tau_des: &JointVector) -> JointVector {
        let out = match self.previous {
            None => *tau_des,
            Some(prev) => {
                let step = self.max_step();
                JointVector::from_fn(|i| prev[i] + (tau_des[i] - prev[i]).clamp(-step, step))
            }
        };
        self.previous = Some(out);
        out
    }
}
