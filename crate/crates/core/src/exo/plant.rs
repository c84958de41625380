//! Simulated exoskeleton joints with the wearer's limb lumped in.
//!
//! Each joint is an independent rotor: `I w' = k_t u + tau_h + tau_g - tau_f`,
//! where `tau_g` is the true gravity load for the current support and
//! `tau_f = k_t (c_c sign w + c_v w)`. Coulomb friction sticks the joint when
//! the applied torque cannot break it free.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exo::control::DUTY_LIMIT;
use crate::exo::gravity::{gravity_compensation, StanceState};
use crate::exo::kinematics::hip_height;
use crate::exo::params::{ExoParams, PlantParams, SensorModel};
use crate::joint::{JointVector, NUM_JOINTS};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlantState {
    /// Joint angles, rad.
    pub q: JointVector,
    /// Joint velocities, rad/s.
    pub omega: JointVector,
    /// Hip-axis position (x, z), m; pitch stays zero.
    pub base: [f64; 2],
    pub contact: [bool; 2],
    /// Vertical ground reaction per foot, N.
    pub contact_force: [f64; 2],
    pub time: f64,
}

impl PlantState {
    pub fn at_rest(q: JointVector) -> Self {
        PlantState {
            q,
            ..PlantState::default()
        }
    }

    pub fn stance(&self) -> StanceState {
        StanceState::from_contacts(self.contact, self.contact_force)
    }

    pub fn is_finite(&self) -> bool {
        self.q.is_finite()
            && self.omega.is_finite()
            && self.base.iter().all(|v| v.is_finite())
            && self.contact_force.iter().all(|f| f.is_finite() && *f >= 0.0)
            && self.time.is_finite()
    }
}

/// Gravity torque the links actually experience (opposite of the compensation).
pub fn true_gravity_torque(state: &PlantState, exo: &ExoParams) -> JointVector {
    -gravity_compensation(&state.q, &state.stance(), exo)
}

/// Advances the plant by `dt` seconds.
pub fn step_plant(
    state: &PlantState,
    duty: &JointVector,
    human_torque: &JointVector,
    dt: f64,
    plant: &PlantParams,
    exo: &ExoParams,
) -> Result<PlantState> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::param("dt", "must be > 0"));
    }
    if !duty.is_finite() || !human_torque.is_finite() || !state.is_finite() {
        return Err(Error::NonFinite(format!("plant input at t = {:.3} s", state.time)));
    }
    let gravity = true_gravity_torque(state, exo);
    let kt = plant.motor_constant;
    let mut next = *state;
    for i in 0..NUM_JOINTS {
        let inertia = plant.inertia[i];
        let drive = kt * duty[i].clamp(-DUTY_LIMIT, DUTY_LIMIT) + human_torque[i] + gravity[i];
        let coulomb = kt * plant.friction.coulomb[i];
        let viscous = kt * plant.friction.viscous[i];
        let w = state.omega[i];
        let h = dt / inertia;
        let w_next = if w == 0.0 {
            if drive.abs() <= coulomb {
                0.0
            } else {
                h * (drive - coulomb * drive.signum()) / (1.0 + h * viscous)
            }
        } else {
            let trial = (w + h * (drive - coulomb * w.signum())) / (1.0 + h * viscous);
            if trial * w < 0.0 {
                0.0
            } else {
                trial
            }
        };
        next.omega[i] = w_next;
        next.q[i] = state.q[i] + dt * w_next;
    }
    next.base = [state.base[0], hip_height(&next.q, exo)];
    next.time = state.time + dt;
    if !next.is_finite() {
        return Err(Error::NonFinite(format!("plant state at t = {:.3} s", next.time)));
    }
    Ok(next)
}

pub fn kinetic_energy(state: &PlantState, plant: &PlantParams) -> f64 {
    (0..NUM_JOINTS)
        .map(|i| 0.5 * plant.inertia[i] * state.omega[i] * state.omega[i])
        .sum()
}

impl SensorModel {
    /// Rounds to the nearest resolution step; identity when resolution is zero.
    pub fn quantize(&self, x: f64) -> f64 {
        if self.resolution > 0.0 {
            (x / self.resolution).round() * self.resolution
        } else {
            x
        }
    }

    pub fn read<R: Rng + ?Sized>(&self, truth: &JointVector, rng: &mut R) -> JointVector {
        let noise = (self.noise_std > 0.0).then(|| Normal::new(0.0, self.noise_std).expect("validated std"));
        JointVector::from_fn(|i| {
            let n = noise.map_or(0.0, |d| d.sample(rng));
            self.quantize(truth[i] + n)
        })
    }
}

/// Strain-gauge reading of the torque the wearer exerts on the exoskeleton.
pub fn measure_interaction_torque<R: Rng + ?Sized>(
    human_torque: &JointVector,
    sensor: &SensorModel,
    rng: &mut R,
) -> JointVector {
    sensor.read(human_torque, rng)
}

/// Joint-torque reading used by the torque loop: the load the actuator output
/// carries, i.e. link weight plus the wearer's torque, with the actuator sign.
pub fn measure_joint_torque<R: Rng + ?Sized>(
    state: &PlantState,
    human_torque: &JointVector,
    exo: &ExoParams,
    sensor: &SensorModel,
    rng: &mut R,
) -> JointVector {
    let load = -(true_gravity_torque(state, exo) + *human_torque);
    sensor.read(&load, rng)
}
