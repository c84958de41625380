//! Smooth band-limited noise for human variability.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Ornstein-Uhlenbeck process followed by a first-order smoother, so the
/// output has a continuous derivative. `std` is the stationary standard
/// deviation of the OU stage.
#[derive(Debug, Clone)]
pub struct SmoothNoise {
    std: f64,
    tau: f64,
    smooth_tau: f64,
    ou: f64,
    value: f64,
}

impl SmoothNoise {
    pub fn new(std: f64, tau: f64, smooth_tau: f64) -> Self {
        SmoothNoise {
            std,
            tau,
            smooth_tau,
            ou: 0.0,
            value: 0.0,
        }
    }

    /// Starts from a stationary OU draw.
    pub fn warm<R: Rng + ?Sized>(mut self, rng: &mut R) -> Self {
        if self.std > 0.0 {
            let z: f64 = StandardNormal.sample(rng);
            self.ou = self.std * z;
            self.value = self.ou;
        }
        self
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn step<R: Rng + ?Sized>(&mut self, dt: f64, rng: &mut R) -> f64 {
        if self.std <= 0.0 || self.tau <= 0.0 {
            return self.value;
        }
        let decay = (-dt / self.tau).exp();
        let z: f64 = StandardNormal.sample(rng);
        self.ou = self.ou * decay + self.std * (1.0 - decay * decay).sqrt() * z;
        if self.smooth_tau > 0.0 {
            self.value += (self.ou - self.value) * (1.0 - (-dt / self.smooth_tau).exp());
        } else {
            self.value = self.ou;
        }
        self.value
    }
}
