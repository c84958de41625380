//! Planar forward kinematics in the sagittal plane (x forward, z up).
//!
//! Segment orientations are absolute angles measured from the downward
//! vertical, positive counter-clockwise (a flexed hip swings the thigh
//! forward). With joint angles `(hip, knee, ankle)` and trunk angle `trunk`:
//!
//! * thigh = trunk + hip
//! * shank = thigh - knee
//! * foot  = shank + pi/2 + ankle (footplate points forward at neutral)

use std::f64::consts::FRAC_PI_2;

use crate::exo::params::{ExoParams, LegGeometry};
use crate::joint::{JointVector, Leg};

pub type Point = [f64; 2];

/// Unit vector of a segment whose absolute angle from the downward vertical is `beta`.
pub fn direction(beta: f64) -> Point {
    [beta.sin(), -beta.cos()]
}

pub fn offset(p: Point, beta: f64, length: f64) -> Point {
    let d = direction(beta);
    [p[0] + length * d[0], p[1] + length * d[1]]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegPoints {
    pub hip: Point,
    pub knee: Point,
    pub ankle: Point,
    pub foot_com: Point,
    pub toe: Point,
    pub thigh_angle: f64,
    pub shank_angle: f64,
    pub foot_angle: f64,
}

/// Leg chain hanging from `hip` with the trunk at `trunk` rad from vertical.
pub fn leg_from_hip(hip: Point, trunk: f64, q: [f64; 3], geom: &LegGeometry, foot_com: f64) -> LegPoints {
    let thigh_angle = trunk + q[0];
    let shank_angle = thigh_angle - q[1];
    let foot_angle = shank_angle + FRAC_PI_2 + q[2];
    let knee = offset(hip, thigh_angle, geom.thigh);
    let ankle = offset(knee, shank_angle, geom.shank);
    LegPoints {
        hip,
        knee,
        ankle,
        foot_com: offset(ankle, foot_angle, foot_com),
        toe: offset(ankle, foot_angle, geom.foot),
        thigh_angle,
        shank_angle,
        foot_angle,
    }
}

/// Both legs with a vertical trunk and the hip axis at the origin.
pub fn legs_vertical_trunk(q: &JointVector, params: &ExoParams) -> [LegPoints; 2] {
    Leg::BOTH.map(|leg| leg_from_hip([0.0, 0.0], 0.0, q.leg(leg), params.leg(leg), params.foot_com))
}

/// Toe height of each leg above the lowest foot point (ankles and toes) with a
/// vertical trunk. The reference toe marker is the distal end of the footplate.
pub fn foot_clearance(q: &JointVector, params: &ExoParams) -> [f64; 2] {
    foot_clearance_on(q, params, [true, true])
}

/// Toe height of each leg above the ground plane set by the feet in
/// `contact` (their lowest ankle or toe point). With no foot in contact the
/// lowest point of either foot is used. A swing toe may read negative.
pub fn foot_clearance_on(q: &JointVector, params: &ExoParams, contact: [bool; 2]) -> [f64; 2] {
    let legs = legs_vertical_trunk(q, params);
    let any = contact[0] || contact[1];
    let ground = legs
        .iter()
        .zip(contact)
        .filter(|(_, c)| *c || !any)
        .flat_map(|(l, _)| [l.ankle[1], l.toe[1]])
        .fold(f64::INFINITY, f64::min);
    [legs[0].toe[1] - ground, legs[1].toe[1] - ground]
}

/// Hip height above the lowest foot point.
pub fn hip_height(q: &JointVector, params: &ExoParams) -> f64 {
    let legs = legs_vertical_trunk(q, params);
    -legs
        .iter()
        .flat_map(|l| [l.ankle[1], l.toe[1]])
        .fold(f64::INFINITY, f64::min)
}
