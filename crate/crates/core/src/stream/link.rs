//! Virtual-time network impairments between the teacher and the controller.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stream::frame::AngleFrame;

/// Teacher frame rate, Hz.
pub const SOURCE_RATE: f64 = 200.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkModel {
    /// Mean one-way latency, s.
    pub latency_mean: f64,
    /// Half-width of uniform latency jitter, s.
    pub latency_jitter: f64,
    pub drop_probability: f64,
    /// Frames may be held back by up to this many frame periods.
    pub reorder_window: u32,
    /// Link RNG seed; derived from the scenario seed when absent.
    pub seed: Option<u64>,
    /// Sender-time intervals `[start, end)` in which every frame is lost, s.
    pub outages: Vec<[f64; 2]>,
}

impl Default for LinkModel {
    fn default() -> Self {
        LinkModel {
            latency_mean: 0.002,
            latency_jitter: 0.001,
            drop_probability: 0.0,
            reorder_window: 0,
            seed: None,
            outages: Vec::new(),
        }
    }
}

impl LinkModel {
    /// A link that delivers every frame instantly and in order.
    pub fn ideal() -> Self {
        LinkModel {
            latency_mean: 0.0,
            latency_jitter: 0.0,
            ..LinkModel::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.latency_mean.is_finite() && self.latency_mean >= 0.0) {
            return Err(Error::param("link.latency_mean", "must be >= 0"));
        }
        if !(self.latency_jitter.is_finite() && self.latency_jitter >= 0.0) {
            return Err(Error::param("link.latency_jitter", "must be >= 0"));
        }
        if !(0.0..1.0).contains(&self.drop_probability) {
            return Err(Error::param("link.drop_probability", "must be in [0, 1)"));
        }
        if self.outages.iter().any(|o| o[0].is_nan() || o[1].is_nan() || o[0] > o[1]) {
            return Err(Error::param("link.outages", "each interval needs start <= end"));
        }
        Ok(())
    }

    /// Worst-case delivery delay, s.
    pub fn max_delay(&self) -> f64 {
        self.latency_mean + self.latency_jitter + self.reorder_window as f64 / SOURCE_RATE
    }
}

#[derive(Debug, Clone)]
pub struct Link {
    model: LinkModel,
    rng: ChaCha8Rng,
    in_flight: Vec<(f64, AngleFrame)>,
}

impl Link {
    pub fn new(model: LinkModel, fallback_seed: u64) -> Result<Self> {
        model.validate()?;
        let seed = model.seed.unwrap_or(fallback_seed);
        Ok(Link {
            model,
            rng: ChaCha8Rng::seed_from_u64(seed),
            in_flight: Vec::new(),
        })
    }

    pub fn model(&self) -> &LinkModel {
        &self.model
    }

    /// Hands a frame to the link at its sender timestamp.
    pub fn send(&mut self, frame: AngleFrame) {
        // Draw every random number unconditionally so impairment settings do
        // not shift the stream of later draws.
        let lost: f64 = self.rng.random();
        let jitter: f64 = self.rng.random_range(-1.0..=1.0);
        let hold = self.rng.random_range(0..=self.model.reorder_window);
        let t = frame.timestamp;
        if lost < self.model.drop_probability || self.model.outages.iter().any(|o| t >= o[0] && t < o[1]) {
            return;
        }
        let delay = (self.model.latency_mean + jitter * self.model.latency_jitter).max(0.0) + hold as f64 / SOURCE_RATE;
        self.in_flight.push((t + delay, frame));
    }

    /// Frames that have arrived by `now`, in arrival order.
    pub fn poll(&mut self, now: f64) -> Vec<AngleFrame> {
        let mut arrived = Vec::new();
        self.in_flight.retain(|&(at, f)| {
            if at <= now {
                arrived.push((at, f));
                false
            } else {
                true
            }
        });
        arrived.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.sequence.cmp(&b.1.sequence)));
        arrived.into_iter().map(|(_, f)| f).collect()
    }
}
