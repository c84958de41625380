//! Linear friction model in duty-cycle units and its identification from a
//! horizontal-plane chirp experiment.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exo::params::{ExoParams, PlantParams};
use crate::exo::plant::{step_plant, PlantState};
use crate::joint::{JointVector, NUM_JOINTS};
use crate::numeric::fit_line;

/// Velocities below this magnitude (rad/s) produce no compensation.
pub const DEADBAND: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointFriction {
    /// Viscous coefficient, duty-% s/rad.
    pub viscous: f64,
    /// Coulomb level, duty-%.
    pub coulomb: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrictionModel {
    pub viscous: JointVector,
    pub coulomb: JointVector,
}

impl Default for FrictionModel {
    fn default() -> Self {
        FrictionModel::uniform(0.8, 3.0)
    }
}

impl FrictionModel {
    pub fn uniform(viscous: f64, coulomb: f64) -> Self {
        FrictionModel {
            viscous: JointVector::splat(viscous),
            coulomb: JointVector::splat(coulomb),
        }
    }

    pub fn from_joints(joints: [JointFriction; NUM_JOINTS]) -> Self {
        FrictionModel {
            viscous: JointVector::from_fn(|i| joints[i].viscous),
            coulomb: JointVector::from_fn(|i| joints[i].coulomb),
        }
    }

    pub fn joint(&self, i: usize) -> JointFriction {
        JointFriction {
            viscous: self.viscous[i],
            coulomb: self.coulomb[i],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for i in 0..NUM_JOINTS {
            let j = self.joint(i);
            if !(j.viscous.is_finite() && j.viscous >= 0.0 && j.coulomb.is_finite() && j.coulomb >= 0.0) {
                return Err(Error::param("friction", format!("joint {i}: coefficients must be finite and >= 0")));
            }
        }
        Ok(())
    }
}

/// Feed-forward friction duty `c_c sign(w) + c_v w`, zero inside the deadband.
pub fn friction_compensation(omega: &JointVector, model: &FrictionModel) -> JointVector {
    JointVector::from_fn(|i| {
        let w = omega[i];
        if w.abs() < DEADBAND {
            0.0
        } else {
            model.coulomb[i] * w.signum() + model.viscous[i] * w
        }
    })
}

/// Fits `duty = c_c sign(w) + c_v w` to one joint's samples.
///
/// Each velocity sign gets its own line; the Coulomb level is half the gap
/// between the two intercepts and the viscous slope is their mean slope.
/// Samples slower than `min_speed` are ignored.
pub fn fit_joint_friction(velocity: &[f64], duty: &[f64], min_speed: f64) -> Result<JointFriction> {
    if velocity.len() != duty.len() {
        return Err(Error::param("friction log", "velocity and duty lengths differ"));
    }
    if velocity.is_empty() {
        return Err(Error::InsufficientData("friction log is empty".into()));
    }
    let mut pos = (Vec::new(), Vec::new());
    let mut neg = (Vec::new(), Vec::new());
    for (&w, &u) in velocity.iter().zip(duty) {
        if !(w.is_finite() && u.is_finite()) {
            return Err(Error::NonFinite("friction log sample".into()));
        }
        if w >= min_speed {
            pos.0.push(w);
            pos.1.push(u);
        } else if w <= -min_speed {
            neg.0.push(w);
            neg.1.push(u);
        }
    }
    if pos.0.len() < 2 || neg.0.len() < 2 {
        return Err(Error::IllPosedFit(format!(
            "need both velocity signs ({} positive, {} negative samples)",
            pos.0.len(),
            neg.0.len()
        )));
    }
    let p = fit_line(&pos.0, &pos.1).map_err(|e| Error::IllPosedFit(format!("positive branch: {e}")))?;
    let n = fit_line(&neg.0, &neg.1).map_err(|e| Error::IllPosedFit(format!("negative branch: {e}")))?;
    Ok(JointFriction {
        viscous: (0.5 * (p.slope + n.slope)).max(0.0),
        coulomb: (0.5 * (p.intercept - n.intercept)).max(0.0),
    })
}

/// Like [`fit_joint_friction`] but with joint acceleration as an extra
/// regressor on each branch, so inertial torque in the drive does not leak
/// into the friction coefficients.
pub fn fit_joint_friction_with_inertia(
    velocity: &[f64],
    acceleration: &[f64],
    duty: &[f64],
    min_speed: f64,
) -> Result<JointFriction> {
    if velocity.len() != duty.len() || velocity.len() != acceleration.len() {
        return Err(Error::param("friction log", "series lengths differ"));
    }
    if velocity.is_empty() {
        return Err(Error::InsufficientData("friction log is empty".into()));
    }
    // Normal equations for duty = a + c_v w + m w'.
    let mut normal = [Matrix3::<f64>::zeros(), Matrix3::zeros()];
    let mut rhs = [Vector3::<f64>::zeros(), Vector3::zeros()];
    let mut count = [0usize; 2];
    for ((&w, &a), &u) in velocity.iter().zip(acceleration).zip(duty) {
        if !(w.is_finite() && a.is_finite() && u.is_finite()) {
            return Err(Error::NonFinite("friction log sample".into()));
        }
        let branch = if w >= min_speed {
            0
        } else if w <= -min_speed {
            1
        } else {
            continue;
        };
        let x = Vector3::new(1.0, w, a);
        normal[branch] += x * x.transpose();
        rhs[branch] += x * u;
        count[branch] += 1;
    }
    if count[0] < 3 || count[1] < 3 {
        return Err(Error::IllPosedFit(format!(
            "need both velocity signs ({} positive, {} negative samples)",
            count[0], count[1]
        )));
    }
    let solve = |k: usize| {
        normal[k]
            .lu()
            .solve(&rhs[k])
            .filter(|b| b.iter().all(|v| v.is_finite()))
            .ok_or_else(|| Error::IllPosedFit("singular branch regression".into()))
    };
    let p = solve(0)?;
    let n = solve(1)?;
    Ok(JointFriction {
        viscous: (0.5 * (p[1] + n[1])).max(0.0),
        coulomb: (0.5 * (p[0] - n[0])).max(0.0),
    })
}

/// Per-joint fit over a multi-joint log.
pub fn identify_friction(velocity: &[JointVector], duty: &[JointVector], min_speed: f64) -> Result<FrictionModel> {
    if velocity.len() != duty.len() {
        return Err(Error::param("friction log", "velocity and duty lengths differ"));
    }
    let mut joints = [JointFriction { viscous: 0.0, coulomb: 0.0 }; NUM_JOINTS];
    for (i, slot) in joints.iter_mut().enumerate() {
        let w: Vec<f64> = velocity.iter().map(|v| v[i]).collect();
        let u: Vec<f64> = duty.iter().map(|v| v[i]).collect();
        *slot = fit_joint_friction(&w, &u, min_speed).map_err(|e| match e {
            Error::IllPosedFit(m) => Error::IllPosedFit(format!("joint {i}: {m}")),
            other => other,
        })?;
    }
    Ok(FrictionModel::from_joints(joints))
}

/// Position-chirp identification experiment run in the horizontal plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChirpProtocol {
    pub min_freq: f64,
    pub max_freq: f64,
    pub duration: f64,
    /// Angle amplitude at low frequency, rad.
    pub amplitude: f64,
    /// Peak velocity cap, rad/s; amplitude shrinks as 1/f once reached.
    pub max_velocity: f64,
    /// Position-loop gains (Nm/rad, Nm s/rad).
    pub kp: f64,
    pub kd: f64,
    /// Samples slower than this are excluded from the fit, rad/s.
    pub min_speed: f64,
}

impl Default for ChirpProtocol {
    fn default() -> Self {
        ChirpProtocol {
            min_freq: 0.01,
            max_freq: 3.0,
            duration: 200.0,
            amplitude: 0.4,
            max_velocity: 2.0,
            kp: 200.0,
            kd: 10.0,
            min_speed: 0.05,
        }
    }
}

impl ChirpProtocol {
    pub fn validate(&self) -> Result<()> {
        if !(self.min_freq > 0.0 && self.max_freq > self.min_freq) {
            return Err(Error::param("chirp", "need 0 < min_freq < max_freq"));
        }
        if !(self.duration.is_finite() && self.duration >= 0.0) {
            return Err(Error::param("chirp.duration", "must be >= 0"));
        }
        if !(self.amplitude > 0.0 && self.max_velocity > 0.0) {
            return Err(Error::param("chirp", "amplitude and max_velocity must be > 0"));
        }
        Ok(())
    }

    /// Reference angle, velocity and acceleration of the exponential chirp at `t`.
    pub fn reference(&self, t: f64) -> (f64, f64, f64) {
        let k = (self.max_freq / self.min_freq).ln() / self.duration;
        let f = self.min_freq * (k * t).exp();
        let phase = 2.0 * std::f64::consts::PI * self.min_freq * ((k * t).exp() - 1.0) / k;
        let w = 2.0 * std::f64::consts::PI * f;
        let a = self.amplitude.min(self.max_velocity / w);
        // Amplitude and frequency drift slowly; their derivatives are omitted.
        (a * phase.sin(), a * w * phase.cos(), -a * w * w * phase.sin())
    }
}

/// Runs the chirp on every joint of a gravity-free plant and fits the friction
/// model from the 1 kHz (velocity, duty) samples. The drive has no friction
/// compensation, so the duty carries the friction signature.
pub fn run_chirp_identification(plant: &PlantParams, protocol: &ChirpProtocol) -> Result<FrictionModel> {
    plant.validate()?;
    protocol.validate()?;
    let dt = 1e-3;
    let steps = (protocol.duration / dt).round() as usize;
    if steps == 0 {
        return Err(Error::InsufficientData("chirp duration is zero".into()));
    }
    let flat = ExoParams {
        gravity: 0.0,
        ..ExoParams::default()
    };
    let mut state = PlantState::default();
    let mut velocity = Vec::with_capacity(steps + 1);
    let mut duty_log = Vec::with_capacity(steps);
    for n in 0..steps {
        let t = n as f64 * dt;
        let (r, rd, rdd) = protocol.reference(t);
        let duty = JointVector::from_fn(|i| {
            let tau = plant.inertia[i] * rdd + protocol.kp * (r - state.q[i]) + protocol.kd * (rd - state.omega[i]);
            (tau / plant.motor_constant).clamp(-100.0, 100.0)
        });
        velocity.push(state.omega);
        duty_log.push(duty);
        state = step_plant(&state, &duty, &JointVector::ZERO, dt, plant, &flat)?;
    }
    velocity.push(state.omega);
    let mut joints = [JointFriction { viscous: 0.0, coulomb: 0.0 }; NUM_JOINTS];
    for (i, slot) in joints.iter_mut().enumerate() {
        // Acceleration over the step each duty sample was applied for.
        let w: Vec<f64> = (0..steps).map(|n| velocity[n][i]).collect();
        let a: Vec<f64> = (0..steps).map(|n| (velocity[n + 1][i] - velocity[n][i]) / dt).collect();
        let u: Vec<f64> = (0..steps).map(|n| duty_log[n][i]).collect();
        *slot = fit_joint_friction_with_inertia(&w, &a, &u, protocol.min_speed)?;
    }
    Ok(FrictionModel::from_joints(joints))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensation_examples() {
        let m = FrictionModel::uniform(0.8, 3.0);
        assert_eq!(friction_compensation(&JointVector::ZERO, &m), JointVector::ZERO);
        let up = friction_compensation(&JointVector::splat(1.0), &m);
        let down = friction_compensation(&JointVector::splat(-1.0), &m);
        for i in 0..NUM_JOINTS {
            assert!((up[i] - 3.8).abs() < 1e-12);
            assert!((down[i] + 3.8).abs() < 1e-12);
        }
        let tiny = friction_compensation(&JointVector::splat(0.005), &m);
        assert_eq!(tiny, JointVector::ZERO);
    }

    #[test]
    fn exact_samples_recover_model() {
        let w: Vec<f64> = (-50..=50).map(|k| k as f64 * 0.04).collect();
        let u: Vec<f64> = w.iter().map(|&w| if w == 0.0 { 0.0 } else { 3.0 * w.signum() + 0.8 * w }).collect();
        let f = fit_joint_friction(&w, &u, 0.01).unwrap();
        assert!((f.viscous - 0.8).abs() < 1e-12);
        assert!((f.coulomb - 3.0).abs() < 1e-12);
    }

    #[test]
    fn pure_viscous_has_no_intercept() {
        let w: Vec<f64> = (-40..=40).map(|k| k as f64 * 0.05).collect();
        let u: Vec<f64> = w.iter().map(|&w| 1.7 * w).collect();
        let f = fit_joint_friction(&w, &u, 0.01).unwrap();
        assert!(f.coulomb.abs() < 1e-12);
        assert!((f.viscous - 1.7).abs() < 1e-12);
    }

    #[test]
    fn single_sign_is_ill_posed() {
        let w = [0.1, 0.2, 0.3, 0.4];
        let u = [3.1, 3.2, 3.3, 3.4];
        assert!(matches!(fit_joint_friction(&w, &u, 0.01), Err(Error::IllPosedFit(_))));
    }

    #[test]
    fn zero_duration_is_insufficient() {
        let p = ChirpProtocol {
            duration: 0.0,
            ..ChirpProtocol::default()
        };
        let err = run_chirp_identification(&PlantParams::default(), &p).unwrap_err();
        assert!(matches!(err, Error::InsufficientData(_)), "{err}");
    }
}
