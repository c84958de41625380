//! Periodic nominal gait: two harmonics per joint, scaled with treadmill speed.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::joint::{Joint, JointKind, JointVector, Leg};

/// Fraction of the gait cycle a foot spends on the ground.
pub const STANCE_FRACTION: f64 = 0.62;
/// Duration of each double-support interval, cycle fraction.
pub const DOUBLE_SUPPORT: f64 = STANCE_FRACTION - 0.5;

/// Harmonic fits (deg) of healthy sagittal kinematics over one cycle starting
/// at heel strike: `[mean, cos 1, sin 1, cos 2, sin 2]`.
pub const NORMATIVE_HARMONICS: [[f64; 5]; 3] = [
    [11.051, 16.912, -1.051, -2.909, -2.862],
    [21.031, 1.003, -18.569, -16.009, 2.949],
    [0.415, -2.669, 6.597, 2.138, -6.31],
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaitPattern {
    /// Per joint kind, degrees: `[mean, cos 1, sin 1, cos 2, sin 2]`.
    pub harmonics: [[f64; 5]; 3],
    /// Steps per minute (two steps per stride).
    pub cadence: f64,
    /// Excursion scale about each joint's mean angle.
    pub amplitude: JointVector,
}

impl GaitPattern {
    /// Pattern for treadmill speed `speed` (km/h): cadence `50 + 30 v` and
    /// excursion scale `0.7 + 0.2 v`.
    pub fn for_speed(speed: f64) -> Result<Self> {
        if !(speed.is_finite() && speed > 0.0 && speed <= 2.0) {
            return Err(Error::param("speed", format!("must be in (0, 2] km/h, got {speed}")));
        }
        Ok(GaitPattern {
            harmonics: NORMATIVE_HARMONICS,
            cadence: 50.0 + 30.0 * speed,
            amplitude: JointVector::splat(0.7 + 0.2 * speed),
        })
    }

    pub fn stride_frequency(&self) -> f64 {
        self.cadence / 120.0
    }

    pub fn stride_period(&self) -> f64 {
        120.0 / self.cadence
    }

    pub fn mean_angle(&self, kind: JointKind) -> f64 {
        self.harmonics[kind.index()][0].to_radians()
    }

    /// Unscaled profile (rad) and its phase derivative (rad per cycle).
    fn base(&self, kind: JointKind, psi: f64) -> (f64, f64) {
        let c = &self.harmonics[kind.index()];
        let (s1, c1) = (TAU * psi).sin_cos();
        let (s2, c2) = (2.0 * TAU * psi).sin_cos();
        let v = c[0] + c[1] * c1 + c[2] * s1 + c[3] * c2 + c[4] * s2;
        let d = TAU * (-c[1] * s1 + c[2] * c1) + 2.0 * TAU * (-c[3] * s2 + c[4] * c2);
        (v.to_radians(), d.to_radians())
    }

    /// Angle (rad) and slope (rad/cycle) of one joint at stride phase `phase`
    /// (left heel strike at 0).
    pub fn joint(&self, joint: Joint, phase: f64) -> (f64, f64) {
        let psi = leg_phase(joint.leg, phase);
        let (v, d) = self.base(joint.kind, psi);
        let m = self.mean_angle(joint.kind);
        let a = self.amplitude[joint];
        (m + a * (v - m), a * d)
    }

    pub fn angles(&self, phase: f64) -> JointVector {
        JointVector::from_fn(|i| self.joint(Joint::from_index(i), phase).0)
    }

    /// Phase derivative of [`GaitPattern::angles`], rad per cycle.
    pub fn slopes(&self, phase: f64) -> JointVector {
        JointVector::from_fn(|i| self.joint(Joint::from_index(i), phase).1)
    }

    /// Leg phase of maximum flexion for a joint kind, found on a fine grid.
    pub fn peak_phase(&self, kind: JointKind) -> f64 {
        let n = 2000;
        (0..n)
            .map(|k| k as f64 / n as f64)
            .max_by(|a, b| self.base(kind, *a).0.total_cmp(&self.base(kind, *b).0))
            .unwrap_or(0.0)
    }
}

/// Phase of `leg` given the stride phase; the right leg trails by half a cycle.
pub fn leg_phase(leg: Leg, phase: f64) -> f64 {
    (phase + 0.5 * leg.index() as f64).rem_euclid(1.0)
}

fn load_profile(psi: f64) -> f64 {
    if psi < DOUBLE_SUPPORT {
        psi / DOUBLE_SUPPORT
    } else if psi < 0.5 {
        1.0
    } else if psi < STANCE_FRACTION {
        (STANCE_FRACTION - psi) / DOUBLE_SUPPORT
    } else {
        0.0
    }
}

/// Foot contact flags and vertical load shares (summing to one) at stride phase.
pub fn contact_schedule(phase: f64) -> ([bool; 2], [f64; 2]) {
    let psi = Leg::BOTH.map(|l| leg_phase(l, phase));
    (psi.map(|p| p < STANCE_FRACTION), psi.map(load_profile))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::safety::RomLimits;

    #[test]
    fn halves_are_shifted_copies() {
        let p = GaitPattern::for_speed(1.1).unwrap();
        for k in 0..50 {
            let phi = k as f64 / 50.0;
            let a = p.angles(phi);
            let b = p.angles(phi + 0.5);
            for kind in JointKind::ALL {
                let l = Joint::new(Leg::Left, kind);
                let r = Joint::new(Leg::Right, kind);
                assert!((a[l] - b[r]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ranges_match_normative_gait() {
        let p = GaitPattern {
            amplitude: JointVector::splat(1.0),
            ..GaitPattern::for_speed(1.0).unwrap()
        };
        let expected = [36.4, 56.0, 24.0];
        for kind in JointKind::ALL {
            let j = Joint::new(Leg::Left, kind);
            let v: Vec<f64> = (0..1000).map(|k| p.joint(j, k as f64 / 1000.0).0.to_degrees()).collect();
            let rom = v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min);
            assert!((rom - expected[kind.index()]).abs() < 1.0, "{kind:?}: {rom}");
        }
    }

    #[test]
    fn within_rom_at_all_speeds() {
        let rom = RomLimits::default();
        for v in [0.3, 0.5, 0.7, 1.1, 1.5, 2.0] {
            let p = GaitPattern::for_speed(v).unwrap();
            for k in 0..200 {
                assert!(rom.contains(&p.angles(k as f64 / 200.0)));
            }
        }
    }

    #[test]
    fn slope_matches_difference_quotient() {
        let p = GaitPattern::for_speed(0.7).unwrap();
        let h = 1e-6;
        for k in 0..20 {
            let phi = k as f64 / 20.0 + 0.013;
            let fd = (p.angles(phi + h) - p.angles(phi - h)) * (0.5 / h);
            assert!((fd - p.slopes(phi)).max_abs() < 1e-6);
        }
    }

    #[test]
    fn loads_sum_to_one() {
        for k in 0..=100 {
            let phi = k as f64 / 100.0;
            let (c, w) = contact_schedule(phi);
            assert!((w[0] + w[1] - 1.0).abs() < 1e-12);
            assert!(c[0] || c[1]);
        }
        let (c, _) = contact_schedule(0.0);
        assert_eq!(c, [true, true]);
        let (c, w) = contact_schedule(0.3);
        assert_eq!((c, w), ([true, false], [1.0, 0.0]));
    }
}
