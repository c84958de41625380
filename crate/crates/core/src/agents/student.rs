//! The student: a walker with its own nominal pattern held by a voluntary
//! joint impedance, whose phase and step amplitude drift toward what the
//! exoskeleton pushes it to do.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agents::noise::SmoothNoise;
use crate::agents::pattern::{contact_schedule, GaitPattern};
use crate::error::{Error, Result};
use crate::exo::plant::PlantState;
use crate::joint::{Joint, JointVector, NUM_JOINTS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudentSpec {
    /// Voluntary stiffness toward the intended angle, Nm/rad (hip, knee, ankle).
    pub stiffness: [f64; 3],
    /// Voluntary damping toward the intended velocity, Nm s/rad.
    pub damping: [f64; 3],
    /// Willingness to follow the exoskeleton, 0 (ignore) to 1.
    pub compliance: f64,
    /// Fraction of the felt torque the student actively goes along with.
    pub yield_gain: f64,
    /// Phase pull per unit felt torque along the pattern, cycles/s per Nm/rad.
    pub phase_gain: f64,
    /// Amplitude pull, 1/(Nm rad s).
    pub amplitude_gain: f64,
    /// Return rate of amplitude to the student's own habit, 1/s.
    pub amplitude_leak: f64,
    /// Relative standard deviation of cadence fluctuations.
    pub cadence_noise: f64,
    pub cadence_noise_tau: f64,
    /// Standard deviation of intended-angle fluctuations, deg.
    pub angle_noise_deg: f64,
    /// Correlation length of the angle fluctuations, strides.
    pub angle_noise_tau: f64,
    /// Smoothing length of the angle fluctuations, strides.
    pub angle_noise_smoothing: f64,
    /// Relative standard deviation of stride-to-stride excursion size.
    #[serde(default)]
    pub amplitude_noise: f64,
    /// Correlation length of the excursion fluctuations, strides.
    #[serde(default = "default_amplitude_noise_tau")]
    pub amplitude_noise_tau: f64,
}

fn default_amplitude_noise_tau() -> f64 {
    1.0
}

impl Default for StudentSpec {
    fn default() -> Self {
        StudentSpec {
            stiffness: [80.0, 60.0, 40.0],
            damping: [4.0, 3.0, 1.5],
            compliance: 1.0,
            yield_gain: 0.5,
            phase_gain: 0.02,
            amplitude_gain: 2.0,
            amplitude_leak: 0.05,
            cadence_noise: 0.02,
            cadence_noise_tau: 2.0,
            angle_noise_deg: 1.5,
            angle_noise_tau: 0.1,
            angle_noise_smoothing: 0.02,
            amplitude_noise: 0.0,
            amplitude_noise_tau: default_amplitude_noise_tau(),
        }
    }
}

impl StudentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.stiffness.iter().chain(&self.damping).any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::param("student.stiffness/damping", "must be finite and >= 0"));
        }
        if !(0.0..=1.0).contains(&self.compliance) {
            return Err(Error::param("student.compliance", "must be in [0, 1]"));
        }
        let nonneg = [
            ("student.yield_gain", self.yield_gain),
            ("student.phase_gain", self.phase_gain),
            ("student.amplitude_gain", self.amplitude_gain),
            ("student.amplitude_leak", self.amplitude_leak),
            ("student.cadence_noise", self.cadence_noise),
            ("student.angle_noise_deg", self.angle_noise_deg),
            ("student.angle_noise_smoothing", self.angle_noise_smoothing),
            ("student.amplitude_noise", self.amplitude_noise),
        ];
        for (name, v) in nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::param(name, "must be finite and >= 0"));
            }
        }
        if !(self.cadence_noise_tau > 0.0 && self.angle_noise_tau > 0.0 && self.amplitude_noise_tau > 0.0) {
            return Err(Error::param("student noise tau", "must be > 0"));
        }
        Ok(())
    }

    /// The same student with every random fluctuation switched off.
    pub fn quiet(self) -> Self {
        StudentSpec {
            cadence_noise: 0.0,
            angle_noise_deg: 0.0,
            amplitude_noise: 0.0,
            ..self
        }
    }

    fn gains(&self, i: usize) -> (f64, f64) {
        let k = Joint::from_index(i).kind.index();
        (self.stiffness[k], self.damping[k])
    }
}

#[derive(Debug, Clone)]
pub struct Student {
    spec: StudentSpec,
    habit: GaitPattern,
    pattern: GaitPattern,
    phase: f64,
    rate: f64,
    cadence: SmoothNoise,
    angle: [SmoothNoise; NUM_JOINTS],
    size: [SmoothNoise; NUM_JOINTS],
}

impl Student {
    pub fn new<R: Rng + ?Sized>(spec: StudentSpec, habit: GaitPattern, initial_phase: f64, rng: &mut R) -> Result<Self> {
        spec.validate()?;
        let cadence = SmoothNoise::new(spec.cadence_noise, spec.cadence_noise_tau, 0.0).warm(rng);
        let std = spec.angle_noise_deg.to_radians();
        let angle = std::array::from_fn(|_| {
            SmoothNoise::new(std, spec.angle_noise_tau, spec.angle_noise_smoothing).warm(rng)
        });
        let size = std::array::from_fn(|_| {
            SmoothNoise::new(spec.amplitude_noise, spec.amplitude_noise_tau, 0.25 * spec.amplitude_noise_tau).warm(rng)
        });
        Ok(Student {
            spec,
            habit,
            pattern: habit,
            phase: initial_phase,
            rate: habit.stride_frequency(),
            cadence,
            angle,
            size,
        })
    }

    pub fn spec(&self) -> &StudentSpec {
        &self.spec
    }

    /// Current (adapted) pattern.
    pub fn pattern(&self) -> &GaitPattern {
        &self.pattern
    }

    /// Unwrapped stride phase, left heel strike at integers.
    pub fn phase(&self) -> f64 {
        self.phase
    }

    /// Phase rate, cycles/s.
    pub fn phase_rate(&self) -> f64 {
        self.rate
    }

    pub fn contact(&self) -> ([bool; 2], [f64; 2]) {
        contact_schedule(self.phase.rem_euclid(1.0))
    }

    /// Slow adaptation to the torque felt over the last control period.
    pub fn adapt(&mut self, felt: &JointVector, dt: f64) {
        let c = self.spec.compliance;
        let slopes = self.pattern.slopes(self.phase);
        let mut num = 0.0;
        let mut den = 1.0;
        for i in 0..NUM_JOINTS {
            num += felt[i] * slopes[i];
            den += slopes[i] * slopes[i];
        }
        let base = self.habit.stride_frequency() * (1.0 + self.cadence.value());
        self.rate = (base + c * self.spec.phase_gain * num / den).max(0.0);

        let q = self.pattern.angles(self.phase);
        for i in 0..NUM_JOINTS {
            let kind = Joint::from_index(i).kind;
            let excursion = q[i] - self.pattern.mean_angle(kind);
            let pull = c * self.spec.amplitude_gain * felt[i] * excursion;
            let leak = self.spec.amplitude_leak * (self.pattern.amplitude[i] - self.habit.amplitude[i]);
            self.pattern.amplitude[i] = (self.pattern.amplitude[i] + dt * (pull - leak)).clamp(0.0, 3.0);
        }
    }

    /// Moves the phase and the random fluctuations forward by `dt`.
    pub fn advance<R: Rng + ?Sized>(&mut self, dt: f64, rng: &mut R) {
        let dphase = self.rate * dt;
        self.phase += dphase;
        self.cadence.step(dt, rng);
        for n in self.angle.iter_mut().chain(self.size.iter_mut()) {
            n.step(dphase, rng);
        }
    }

    /// Intended angles and velocities right now.
    pub fn intent(&self) -> (JointVector, JointVector) {
        let q0 = self.pattern.angles(self.phase);
        let q = JointVector::from_fn(|i| {
            let mean = self.pattern.mean_angle(Joint::from_index(i).kind);
            mean + (q0[i] - mean) * (1.0 + self.size[i].value()) + self.angle[i].value()
        });
        let w = self.pattern.slopes(self.phase) * self.rate;
        (q, w)
    }

    /// Torque the student applies to the exoskeleton.
    pub fn voluntary_torque(&self, state: &PlantState, felt: &JointVector) -> JointVector {
        let (q, w) = self.intent();
        JointVector::from_fn(|i| {
            let (k, b) = self.spec.gains(i);
            k * (q[i] - state.q[i]) + b * (w[i] - state.omega[i]) + self.spec.compliance * self.spec.yield_gain * felt[i]
        })
    }
}
