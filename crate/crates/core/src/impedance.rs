//! One-pole/one-zero virtual impedance mapping joint tracking error to a
//! desired interaction torque.
//!
//! The continuous law is
//!
//! ```text
//! Z(s) = (k_high_f * s + w_c * k_low_f) / (s + w_c),   w_c = 2*pi*f_cut
//! ```
//!
//! which is stiff (`k_low_f`) below the corner and compliant (`k_high_f`)
//! above it. Written this way the `k_high_f = 0` low-pass limit needs no
//! special casing. The controller runs a bilinear realisation per joint.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::joint::JointVector;
use crate::numeric::{fit_line, LineFit};

/// Continuous impedance design parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImpedanceProfile {
    /// Stiffness at low frequency, Nm/rad.
    pub k_low_f: f64,
    /// Stiffness at high frequency, Nm/rad.
    pub k_high_f: f64,
    /// Corner frequency, Hz.
    pub f_cut: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileShape {
    /// Both stiffnesses zero: no interaction.
    Zero,
    /// `k_high_f == k_low_f`: flat stiffness at every frequency.
    Constant,
    /// `k_high_f == 0`: first-order low-pass of gain `k_low_f`.
    LowPass,
    /// General frequency-shaped stiffness.
    Shaped,
}

pub const PRESET_NAMES: [&str; 11] = [
    "Z_zero",
    "Z_soft",
    "Z_stiff",
    "Z_constant",
    "Z_designed",
    "Z1",
    "Z2",
    "Z3",
    "Z4",
    "Z5",
    "Z6",
];

/// Validates and builds a profile.
pub fn design_profile(k_low_f: f64, k_high_f: f64, f_cut: f64) -> Result<ImpedanceProfile> {
    let p = ImpedanceProfile {
        k_low_f,
        k_high_f,
        f_cut,
    };
    p.validate()?;
    Ok(p)
}

/// Resolves a named preset.
pub fn preset(name: &str) -> Result<ImpedanceProfile> {
    let (lo, hi) = match name {
        "Z_zero" => (0.0, 0.0),
        "Z_soft" | "Z_designed" => (100.0, 50.0),
        "Z_stiff" => (200.0, 100.0),
        "Z_constant" => (100.0, 100.0),
        "Z1" => (150.0, 150.0),
        "Z2" => (150.0, 100.0),
        "Z3" => (150.0, 50.0),
        "Z4" => (150.0, 30.0),
        "Z5" => (150.0, 15.0),
        "Z6" => (150.0, 0.0),
        _ => {
            return Err(Error::UnknownPreset {
                name: name.to_string(),
                valid: PRESET_NAMES.iter().map(|s| s.to_string()).collect(),
            })
        }
    };
    design_profile(lo, hi, 1.0)
}

impl ImpedanceProfile {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("k_low_f", self.k_low_f), ("k_high_f", self.k_high_f)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::param(name, format!("stiffness must be finite and >= 0, got {v}")));
            }
        }
        if !self.f_cut.is_finite() || self.f_cut <= 0.0 {
            return Err(Error::param(
                "f_cut",
                format!("corner frequency must be > 0 Hz, got {}", self.f_cut),
            ));
        }
        Ok(())
    }

    pub fn shape(&self) -> ProfileShape {
        if self.k_low_f == 0.0 && self.k_high_f == 0.0 {
            ProfileShape::Zero
        } else if self.k_high_f == self.k_low_f {
            ProfileShape::Constant
        } else if self.k_high_f == 0.0 {
            ProfileShape::LowPass
        } else {
            ProfileShape::Shaped
        }
    }

    pub fn corner_rad_s(&self) -> f64 {
        2.0 * PI * self.f_cut
    }

    /// Evaluates `Z(s)` at an arbitrary complex frequency.
    pub fn transfer(&self, s: Complex64) -> Complex64 {
        let wc = self.corner_rad_s();
        (s * self.k_high_f + wc * self.k_low_f) / (s + wc)
    }
}

/// Magnitude (Nm/rad) and phase (rad) of the impedance at `f` Hz.
pub fn frequency_response(profile: &ImpedanceProfile, f: f64) -> (f64, f64) {
    let z = profile.transfer(Complex64::new(0.0, 2.0 * PI * f.max(0.0)));
    (z.norm(), z.arg())
}

/// Joint tracking error `theta_des - theta_act` at a controller timestamp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingError {
    pub theta_e: JointVector,
    pub timestamp: f64,
}

impl TrackingError {
    pub fn new(theta_des: JointVector, theta_act: JointVector, timestamp: f64) -> Self {
        TrackingError {
            theta_e: theta_des - theta_act,
            timestamp,
        }
    }
}

/// Bilinear realisation of an [`ImpedanceProfile`] with one filter state per joint.
///
/// `y[n] = b0*x[n] + b1*x[n-1] - a1*y[n-1]`
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteImpedance {
    pub b0: f64,
    pub b1: f64,
    pub a1: f64,
    pub sample_rate: f64,
    profile: ImpedanceProfile,
    prev_in: JointVector,
    prev_out: JointVector,
}

/// Bilinear (Tustin) discretisation without prewarping.
pub fn discretize(profile: &ImpedanceProfile, sample_rate: f64) -> Result<DiscreteImpedance> {
    profile.validate()?;
    if !sample_rate.is_finite() || sample_rate <= 0.0 {
        return Err(Error::param(
            "sample_rate",
            format!("must be > 0 Hz, got {sample_rate}"),
        ));
    }
    let c = 2.0 * sample_rate;
    let wc = profile.corner_rad_s();
    let den = c + wc;
    Ok(DiscreteImpedance {
        b0: (profile.k_high_f * c + wc * profile.k_low_f) / den,
        b1: (wc * profile.k_low_f - profile.k_high_f * c) / den,
        a1: (wc - c) / den,
        sample_rate,
        profile: *profile,
        prev_in: JointVector::ZERO,
        prev_out: JointVector::ZERO,
    })
}

impl DiscreteImpedance {
    pub fn profile(&self) -> &ImpedanceProfile {
        &self.profile
    }

    /// True when the sample rate is below ten times the corner frequency.
    pub fn is_undersampled(&self) -> bool {
        self.sample_rate < 10.0 * self.profile.f_cut
    }

    /// Discrete pole location (`-a1`).
    pub fn pole(&self) -> f64 {
        -self.a1
    }

    pub fn dc_gain(&self) -> f64 {
        (self.b0 + self.b1) / (1.0 + self.a1)
    }

    pub fn reset(&mut self) {
        self.prev_in = JointVector::ZERO;
        self.prev_out = JointVector::ZERO;
    }

    /// Advances every joint filter by one sample and returns the desired
    /// interaction torque. Non-finite errors leave the state untouched.
    pub fn compute_torque(&mut self, error: &TrackingError) -> Result<JointVector> {
        if !error.theta_e.is_finite() || !error.timestamp.is_finite() {
            return Err(Error::NonFinite(format!(
                "tracking error at t = {}",
                error.timestamp
            )));
        }
        let x = error.theta_e;
        let y = JointVector::from_fn(|i| {
            self.b0 * x[i] + self.b1 * self.prev_in[i] - self.a1 * self.prev_out[i]
        });
        self.prev_in = x;
        self.prev_out = y;
        Ok(y)
    }
}

/// Least-squares rendered stiffness of a walking trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StiffnessFit {
    /// Nm/rad.
    pub slope: f64,
    pub r_squared: f64,
}

/// OLS slope (with intercept) of desired torque against tracking error.
pub fn effective_stiffness(errors: &[f64], torques: &[f64]) -> Result<StiffnessFit> {
    let LineFit {
        slope, r_squared, ..
    } = fit_line(errors, torques)?;
    Ok(StiffnessFit { slope, r_squared })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn scalar(filter: &mut DiscreteImpedance, x: f64) -> f64 {
        let e = TrackingError {
            theta_e: JointVector::splat(x),
            timestamp: 0.0,
        };
        filter.compute_torque(&e).unwrap()[0]
    }

    #[test]
    fn design_examples() {
        assert_eq!(design_profile(150.0, 150.0, 1.0).unwrap().shape(), ProfileShape::Constant);
        assert_eq!(design_profile(150.0, 0.0, 1.0).unwrap().shape(), ProfileShape::LowPass);
        assert_eq!(design_profile(100.0, 50.0, 1.0).unwrap().shape(), ProfileShape::Shaped);
        assert_eq!(preset("Z_zero").unwrap().shape(), ProfileShape::Zero);
    }

    #[test]
    fn design_rejects_bad_parameters() {
        assert!(design_profile(-1.0, 0.0, 1.0).is_err());
        assert!(design_profile(1.0, -0.5, 1.0).is_err());
        assert!(design_profile(1.0, 0.5, 0.0).is_err());
        assert!(design_profile(1.0, 0.5, -2.0).is_err());
        assert!(design_profile(f64::NAN, 0.5, 1.0).is_err());
    }

    #[test]
    fn unknown_preset_lists_valid_names() {
        let err = preset("Z_9").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("Z_9"));
        for name in PRESET_NAMES {
            assert!(msg.contains(name), "{msg}");
        }
    }

    #[test]
    fn asymptotes() {
        let p = design_profile(100.0, 50.0, 1.0).unwrap();
        assert_relative_eq!(frequency_response(&p, 0.0).0, 100.0, max_relative = 1e-12);
        assert_relative_eq!(frequency_response(&p, 1e6).0, 50.0, max_relative = 1e-4);
    }

    #[test]
    fn constant_stiffness_is_pure_gain() {
        let p = design_profile(100.0, 100.0, 1.0).unwrap();
        let mut f = discretize(&p, 100.0).unwrap();
        assert_relative_eq!(f.b0, 100.0, max_relative = 1e-12);
        for k in 0..50 {
            let x = (k as f64 * 0.37).sin() * 0.2;
            assert_relative_eq!(scalar(&mut f, x), 100.0 * x, max_relative = 1e-9, epsilon = 1e-12);
        }
    }

    #[test]
    fn designed_step_response() {
        let p = design_profile(100.0, 50.0, 1.0).unwrap();
        let mut f = discretize(&p, 100.0).unwrap();
        let first = scalar(&mut f, 0.1);
        // b0 * 0.1 with b0 = (50*200 + 2*pi*100) / (200 + 2*pi)
        assert_relative_eq!(first, 5.152_295_139_757, max_relative = 1e-6);
        let mut last = first;
        for _ in 0..2000 {
            last = scalar(&mut f, 0.1);
        }
        assert_relative_eq!(last, 10.0, max_relative = 1e-9);
        assert_relative_eq!(f.dc_gain(), 100.0, max_relative = 1e-12);
    }

    #[test]
    fn low_pass_impulse_area() {
        let p = preset("Z6").unwrap();
        let mut f = discretize(&p, 100.0).unwrap();
        let mut sum = scalar(&mut f, 1.0);
        for _ in 0..5000 {
            sum += scalar(&mut f, 0.0);
        }
        assert_relative_eq!(sum, 150.0, max_relative = 1e-9);
    }

    #[test]
    fn reset_then_zero_input_is_zero() {
        let p = preset("Z_designed").unwrap();
        let mut f = discretize(&p, 100.0).unwrap();
        scalar(&mut f, 0.3);
        f.reset();
        for _ in 0..10 {
            assert_eq!(scalar(&mut f, 0.0), 0.0);
        }
    }

    #[test]
    fn non_finite_input_preserves_state() {
        let p = preset("Z_designed").unwrap();
        let mut f = discretize(&p, 100.0).unwrap();
        scalar(&mut f, 0.1);
        let snapshot = f.clone();
        let bad = TrackingError {
            theta_e: JointVector::splat(f64::NAN),
            timestamp: 0.01,
        };
        assert!(matches!(f.compute_torque(&bad), Err(Error::NonFinite(_))));
        assert_eq!(f, snapshot);
    }

    #[test]
    fn rejects_bad_sample_rate() {
        let p = preset("Z_designed").unwrap();
        assert!(discretize(&p, 0.0).is_err());
        assert!(discretize(&p, -100.0).is_err());
        assert!(discretize(&p, 5.0).unwrap().is_undersampled());
    }

    #[test]
    fn effective_stiffness_of_pure_gain() {
        let e: Vec<f64> = (0..100).map(|k| (k as f64 * 0.1).sin() * 0.05).collect();
        let t: Vec<f64> = e.iter().map(|v| 100.0 * v).collect();
        let fit = effective_stiffness(&e, &t).unwrap();
        assert_relative_eq!(fit.slope, 100.0, max_relative = 1e-9);
        assert_relative_eq!(fit.r_squared, 1.0, max_relative = 1e-12);
        assert!(matches!(
            effective_stiffness(&[0.1; 5], &[1.0; 5]),
            Err(Error::DegenerateFit(_))
        ));
    }
}
