use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exo::friction::FrictionModel;
use crate::joint::{JointVector, Leg};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LegGeometry {
    /// Hip to knee, m.
    pub thigh: f64,
    /// Knee to ankle, m.
    pub shank: f64,
    /// Ankle to toe along the footplate, m.
    pub foot: f64,
}

/// Mass and geometry of the exoskeleton as seen by the gravity model.
///
/// Thigh and shank masses are lumped at the hip and knee actuators; the foot
/// mass sits `foot_com` metres along the footplate from the ankle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExoParams {
    pub left: LegGeometry,
    pub right: LegGeometry,
    pub foot_com: f64,
    pub backpack_mass: f64,
    /// Height of the backpack centre of mass above the hip axis, m.
    pub backpack_height: f64,
    pub hip_mass: f64,
    pub knee_mass: f64,
    pub foot_mass: f64,
    pub gravity: f64,
    /// Wearer body mass used to normalise torques, kg.
    pub body_mass: f64,
}

impl Default for ExoParams {
    fn default() -> Self {
        let leg = LegGeometry {
            thigh: 0.42,
            shank: 0.42,
            foot: 0.20,
        };
        ExoParams {
            left: leg,
            right: leg,
            foot_com: 0.05,
            backpack_mass: 8.0,
            backpack_height: 0.15,
            hip_mass: 3.0,
            knee_mass: 2.5,
            foot_mass: 1.5,
            gravity: 9.81,
            body_mass: 75.0,
        }
    }
}

impl ExoParams {
    pub fn leg(&self, leg: Leg) -> &LegGeometry {
        match leg {
            Leg::Left => &self.left,
            Leg::Right => &self.right,
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.backpack_mass + 2.0 * (self.hip_mass + self.knee_mass + self.foot_mass)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("left.thigh", self.left.thigh),
            ("left.shank", self.left.shank),
            ("left.foot", self.left.foot),
            ("right.thigh", self.right.thigh),
            ("right.shank", self.right.shank),
            ("right.foot", self.right.foot),
            ("backpack_mass", self.backpack_mass),
            ("hip_mass", self.hip_mass),
            ("knee_mass", self.knee_mass),
            ("foot_mass", self.foot_mass),
            ("body_mass", self.body_mass),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("must be > 0, got {v}")));
            }
        }
        for (name, v) in [
            ("foot_com", self.foot_com),
            ("backpack_height", self.backpack_height),
            ("gravity", self.gravity),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::param(name, format!("must be >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Strain-gauge model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorModel {
    /// Quantisation step, Nm. Zero disables quantisation.
    pub resolution: f64,
    /// Standard deviation of additive zero-mean noise, Nm.
    pub noise_std: f64,
}

impl Default for SensorModel {
    fn default() -> Self {
        SensorModel {
            resolution: 0.1,
            noise_std: 0.0,
        }
    }
}

/// Physical properties of the simulated joints that the controller does not
/// read directly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantParams {
    /// Exoskeleton-side inertia about each joint, kg m^2.
    pub inertia: JointVector,
    /// Motor torque per duty-cycle percent, Nm/%.
    pub motor_constant: f64,
    /// True joint friction, in duty-% units.
    pub friction: FrictionModel,
    pub sensor: SensorModel,
}

impl Default for PlantParams {
    fn default() -> Self {
        PlantParams {
            inertia: JointVector::symmetric(0.35, 0.15, 0.03),
            motor_constant: 1.5,
            friction: FrictionModel::default(),
            sensor: SensorModel::default(),
        }
    }
}

impl PlantParams {
    pub fn validate(&self) -> Result<()> {
        if !self.inertia.iter().all(|v| v.is_finite() && *v > 0.0) {
            return Err(Error::param("plant.inertia", "every inertia must be > 0"));
        }
        if !(self.motor_constant.is_finite() && self.motor_constant > 0.0) {
            return Err(Error::param("plant.motor_constant", "must be > 0"));
        }
        if !(self.sensor.resolution >= 0.0 && self.sensor.noise_std >= 0.0) {
            return Err(Error::param("plant.sensor", "resolution and noise must be >= 0"));
        }
        self.friction.validate()
    }
}
