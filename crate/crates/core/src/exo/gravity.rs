//! Whole-exoskeleton gravity compensation for a floating base whose support
//! changes with the stance state.
//!
//! In single stance the chain is rooted at the stance foot; the stance joints
//! carry everything above them while the swing leg hangs from the hip. In
//! flight the backpack is the reference. Compensation torques are the
//! gradient of gravitational potential energy with respect to joint angles,
//! computed here as static moment sums about each joint.

use serde::{Deserialize, Serialize};

use crate::exo::kinematics::{direction, leg_from_hip, legs_vertical_trunk, offset, Point};
use crate::exo::params::ExoParams;
use crate::joint::{Joint, JointKind, JointVector, Leg};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StanceState {
    LeftStance,
    RightStance,
    /// Both feet loaded; `alpha` is the left foot's share of the vertical load.
    DoubleStance { alpha: f64 },
    Flight,
}

impl StanceState {
    /// Classifies support from per-foot contact flags and vertical forces.
    pub fn from_contacts(contact: [bool; 2], force: [f64; 2]) -> StanceState {
        match contact {
            [true, true] => {
                let total = force[0] + force[1];
                let alpha = if total > 0.0 { force[0] / total } else { 0.5 };
                StanceState::DoubleStance {
                    alpha: alpha.clamp(0.0, 1.0),
                }
            }
            [true, false] => StanceState::LeftStance,
            [false, true] => StanceState::RightStance,
            [false, false] => StanceState::Flight,
        }
    }

    /// Left-foot load share: 1 in left stance, 0 in right stance, `None` in flight.
    pub fn left_share(&self) -> Option<f64> {
        match *self {
            StanceState::LeftStance => Some(1.0),
            StanceState::RightStance => Some(0.0),
            StanceState::DoubleStance { alpha } => Some(alpha),
            StanceState::Flight => None,
        }
    }

    /// Numeric code used in logs: 0 flight, 1 left, 2 right, 3 double.
    pub fn code(&self) -> u8 {
        match self {
            StanceState::Flight => 0,
            StanceState::LeftStance => 1,
            StanceState::RightStance => 2,
            StanceState::DoubleStance { .. } => 3,
        }
    }
}

/// Compensation torques (Nm) that statically cancel gravity on the exoskeleton.
pub fn gravity_compensation(q: &JointVector, stance: &StanceState, params: &ExoParams) -> JointVector {
    match *stance {
        StanceState::LeftStance => single_stance(q, Leg::Left, params),
        StanceState::RightStance => single_stance(q, Leg::Right, params),
        StanceState::DoubleStance { alpha } => {
            let a = alpha.clamp(0.0, 1.0);
            single_stance(q, Leg::Left, params) * a + single_stance(q, Leg::Right, params) * (1.0 - a)
        }
        StanceState::Flight => flight(q, params),
    }
}

struct MassPoints {
    backpack: Point,
    hip: Point,
    knee: [Point; 2],
    foot: [Point; 2],
}

fn mass_points(q: &JointVector, params: &ExoParams) -> (MassPoints, [crate::exo::kinematics::LegPoints; 2]) {
    let legs = legs_vertical_trunk(q, params);
    let pts = MassPoints {
        backpack: [0.0, params.backpack_height],
        hip: [0.0, 0.0],
        knee: [legs[0].knee, legs[1].knee],
        foot: [legs[0].foot_com, legs[1].foot_com],
    };
    (pts, legs)
}

fn moment(masses: &[(f64, Point)], pivot: Point, sign: f64, g: f64) -> f64 {
    sign * g * masses.iter().map(|(m, p)| m * (p[0] - pivot[0])).sum::<f64>()
}

/// Swing-leg torques: the chain hangs from the hip.
fn swing_leg(out: &mut JointVector, leg: Leg, pts: &MassPoints, legs: &[crate::exo::kinematics::LegPoints; 2], params: &ExoParams) {
    let i = leg.index();
    let g = params.gravity;
    let lp = &legs[i];
    let knee_m = (params.knee_mass, pts.knee[i]);
    let foot_m = (params.foot_mass, pts.foot[i]);
    out[Joint::new(leg, JointKind::Hip)] = moment(&[knee_m, foot_m], lp.hip, 1.0, g);
    out[Joint::new(leg, JointKind::Knee)] = moment(&[foot_m], lp.knee, -1.0, g);
    out[Joint::new(leg, JointKind::Ankle)] = moment(&[foot_m], lp.ankle, 1.0, g);
}

fn single_stance(q: &JointVector, stance: Leg, params: &ExoParams) -> JointVector {
    let (pts, legs) = mass_points(q, params);
    let mut out = JointVector::ZERO;
    let swing = stance.other();
    swing_leg(&mut out, swing, &pts, &legs, params);

    let g = params.gravity;
    let s = stance.index();
    let w = swing.index();
    let upper = [
        (params.backpack_mass, pts.backpack),
        (2.0 * params.hip_mass, pts.hip),
        (params.knee_mass, pts.knee[w]),
        (params.foot_mass, pts.foot[w]),
    ];
    let lp = &legs[s];
    out[Joint::new(stance, JointKind::Hip)] = moment(&upper, lp.hip, -1.0, g);
    let mut above_knee = upper.to_vec();
    above_knee.push((params.knee_mass, pts.knee[s]));
    out[Joint::new(stance, JointKind::Knee)] = moment(&above_knee, lp.knee, 1.0, g);
    out[Joint::new(stance, JointKind::Ankle)] = moment(&above_knee, lp.ankle, -1.0, g);
    out
}

fn flight(q: &JointVector, params: &ExoParams) -> JointVector {
    let (pts, legs) = mass_points(q, params);
    let mut out = JointVector::ZERO;
    for leg in Leg::BOTH {
        swing_leg(&mut out, leg, &pts, &legs, params);
    }
    out
}

/// Reference frame for the potential-energy evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GravityBase {
    /// Backpack fixed and vertical.
    Trunk,
    /// Stance foot fixed at absolute angle `foot_angle` (rad from downward vertical).
    Foot { leg: Leg, foot_angle: f64 },
}

impl GravityBase {
    /// Base implied by a configuration with the trunk vertical.
    pub fn at(q: &JointVector, stance: Option<Leg>) -> GravityBase {
        match stance {
            None => GravityBase::Trunk,
            Some(leg) => {
                let [h, k, a] = q.leg(leg);
                GravityBase::Foot {
                    leg,
                    foot_angle: h - k + std::f64::consts::FRAC_PI_2 + a,
                }
            }
        }
    }
}

/// Gravitational potential energy (J) of the exoskeleton links with the base
/// held fixed. Only differences are meaningful.
pub fn potential_energy(q: &JointVector, base: GravityBase, params: &ExoParams) -> f64 {
    let g = params.gravity;
    let (hip, trunk, mut legs_z) = match base {
        GravityBase::Trunk => ([0.0, 0.0], 0.0, Vec::new()),
        GravityBase::Foot { leg, foot_angle } => {
            let geom = params.leg(leg);
            let [qh, qk, qa] = q.leg(leg);
            let ankle = [0.0, 0.0];
            let shank = foot_angle - std::f64::consts::FRAC_PI_2 - qa;
            let knee = offset(ankle, shank, -geom.shank);
            let thigh = shank + qk;
            let hip = offset(knee, thigh, -geom.thigh);
            let foot = offset(ankle, foot_angle, params.foot_com);
            let trunk = thigh - qh;
            (
                hip,
                trunk,
                vec![params.knee_mass * knee[1], params.foot_mass * foot[1]],
            )
        }
    };
    let up = direction(trunk);
    let backpack_z = hip[1] - params.backpack_height * up[1];
    legs_z.push(params.backpack_mass * backpack_z);
    legs_z.push(2.0 * params.hip_mass * hip[1]);
    let hanging: Vec<Leg> = match base {
        GravityBase::Trunk => Leg::BOTH.to_vec(),
        GravityBase::Foot { leg, .. } => vec![leg.other()],
    };
    for leg in hanging {
        let lp = leg_from_hip(hip, trunk, q.leg(leg), params.leg(leg), params.foot_com);
        legs_z.push(params.knee_mass * lp.knee[1]);
        legs_z.push(params.foot_mass * lp.foot_com[1]);
    }
    g * legs_z.iter().sum::<f64>()
}
