//! Whole-exoskeleton closed-loop compensation: gravity and friction
//! feed-forward around a joint-torque PD loop that outputs motor duty.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exo::friction::{friction_compensation, FrictionModel};
use crate::exo::gravity::{gravity_compensation, StanceState};
use crate::exo::params::ExoParams;
use crate::joint::JointVector;

pub const DUTY_LIMIT: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TorqueGains {
    /// Duty-% per Nm of torque error.
    pub kp: f64,
    /// Duty-% per Nm/s of measured torque rate.
    pub kd: f64,
    /// Adds `tau_cmd / k_t` to the duty so the PD only corrects residuals.
    pub feedforward: bool,
}

impl Default for TorqueGains {
    fn default() -> Self {
        TorqueGains {
            kp: 2.0,
            kd: 0.001,
            feedforward: true,
        }
    }
}

impl TorqueGains {
    pub fn validate(&self) -> Result<()> {
        if !(self.kp.is_finite() && self.kp >= 0.0 && self.kd.is_finite() && self.kd >= 0.0) {
            return Err(Error::param("gains", "kp and kd must be finite and >= 0"));
        }
        Ok(())
    }
}

/// `kp (tau_cmd - tau_meas) - kd d(tau_meas)/dt`, saturated to +-100 %.
pub fn torque_pd(
    tau_cmd: &JointVector,
    tau_meas: &JointVector,
    tau_meas_rate: &JointVector,
    gains: &TorqueGains,
) -> JointVector {
    JointVector::from_fn(|i| {
        (gains.kp * (tau_cmd[i] - tau_meas[i]) - gains.kd * tau_meas_rate[i]).clamp(-DUTY_LIMIT, DUTY_LIMIT)
    })
}

/// Controller state spanning the 100 Hz command update and the 1 kHz duty loop.
#[derive(Debug, Clone)]
pub struct Wecc {
    gains: TorqueGains,
    friction: FrictionModel,
    motor_constant: f64,
    tau_cmd: JointVector,
    prev_meas: Option<JointVector>,
}

impl Wecc {
    pub fn new(gains: TorqueGains, friction: FrictionModel, motor_constant: f64) -> Result<Self> {
        gains.validate()?;
        friction.validate()?;
        if !(motor_constant.is_finite() && motor_constant > 0.0) {
            return Err(Error::param("motor_constant", "must be > 0"));
        }
        Ok(Wecc {
            gains,
            friction,
            motor_constant,
            tau_cmd: JointVector::ZERO,
            prev_meas: None,
        })
    }

    pub fn gains(&self) -> &TorqueGains {
        &self.gains
    }

    pub fn command(&self) -> JointVector {
        self.tau_cmd
    }

    /// Latches `tau_des + gravity_compensation(q, stance)` as the joint-torque target.
    pub fn set_command(
        &mut self,
        tau_des: &JointVector,
        q: &JointVector,
        stance: &StanceState,
        params: &ExoParams,
    ) -> JointVector {
        self.tau_cmd = *tau_des + gravity_compensation(q, stance, params);
        self.tau_cmd
    }

    /// Duty for one inner-loop step from the strain-gauge reading and joint velocity.
    pub fn duty(&mut self, tau_meas: &JointVector, omega: &JointVector, dt: f64) -> JointVector {
        let rate = match self.prev_meas {
            Some(prev) => (*tau_meas - prev) * (1.0 / dt),
            None => JointVector::ZERO,
        };
        self.prev_meas = Some(*tau_meas);
        let mut duty = torque_pd(&self.tau_cmd, tau_meas, &rate, &self.gains);
        if self.gains.feedforward {
            duty += self.tau_cmd * (1.0 / self.motor_constant);
        }
        duty += friction_compensation(omega, &self.friction);
        duty.map(|u| u.clamp(-DUTY_LIMIT, DUTY_LIMIT))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pd_examples() {
        let g = TorqueGains {
            kp: 2.0,
            kd: 0.0,
            feedforward: false,
        };
        let z = JointVector::ZERO;
        assert_eq!(torque_pd(&JointVector::splat(3.0), &JointVector::splat(3.0), &z, &g), z);
        let d = torque_pd(&JointVector::splat(1.0), &z, &z, &g);
        assert!(d.iter().all(|&u| (u - 2.0).abs() < 1e-12));
        let sat = torque_pd(&JointVector::splat(500.0), &z, &z, &g);
        assert!(sat.iter().all(|&u| u == 100.0));
        let neg = torque_pd(&JointVector::splat(-500.0), &z, &z, &g);
        assert!(neg.iter().all(|&u| u == -100.0));
    }

    #[test]
    fn derivative_acts_on_measurement() {
        let g = TorqueGains {
            kp: 0.0,
            kd: 0.5,
            feedforward: false,
        };
        let z = JointVector::ZERO;
        let d = torque_pd(&z, &z, &JointVector::splat(4.0), &g);
        assert!(d.iter().all(|&u| (u + 2.0).abs() < 1e-12));
    }

    #[test]
    fn feedforward_adds_command_over_kt() {
        let gains = TorqueGains {
            kp: 0.0,
            kd: 0.0,
            feedforward: true,
        };
        let mut w = Wecc::new(gains, FrictionModel::uniform(0.0, 0.0), 1.5).unwrap();
        let params = ExoParams {
            gravity: 0.0,
            ..ExoParams::default()
        };
        w.set_command(&JointVector::splat(3.0), &JointVector::ZERO, &StanceState::Flight, &params);
        let d = w.duty(&JointVector::ZERO, &JointVector::ZERO, 1e-3);
        assert!(d.iter().all(|&u| (u - 2.0).abs() < 1e-12));
    }
}
