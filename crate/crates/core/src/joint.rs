//! Six-joint quantities in a fixed order: left hip, knee, ankle, then right.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

pub const NUM_JOINTS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Leg {
    Left,
    Right,
}

impl Leg {
    pub const BOTH: [Leg; 2] = [Leg::Left, Leg::Right];

    pub fn other(self) -> Leg {
        match self {
            Leg::Left => Leg::Right,
            Leg::Right => Leg::Left,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Leg::Left => 0,
            Leg::Right => 1,
        }
    }

    pub fn joints(self) -> [Joint; 3] {
        [
            Joint::new(self, JointKind::Hip),
            Joint::new(self, JointKind::Knee),
            Joint::new(self, JointKind::Ankle),
        ]
    }

    pub fn name(self) -> &'static str {
        match self {
            Leg::Left => "l",
            Leg::Right => "r",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JointKind {
    Hip,
    Knee,
    Ankle,
}

impl JointKind {
    pub const ALL: [JointKind; 3] = [JointKind::Hip, JointKind::Knee, JointKind::Ankle];

    pub fn index(self) -> usize {
        match self {
            JointKind::Hip => 0,
            JointKind::Knee => 1,
            JointKind::Ankle => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            JointKind::Hip => "hip",
            JointKind::Knee => "knee",
            JointKind::Ankle => "ankle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Joint {
    pub leg: Leg,
    pub kind: JointKind,
}

impl Joint {
    pub const ALL: [Joint; NUM_JOINTS] = [
        Joint::new(Leg::Left, JointKind::Hip),
        Joint::new(Leg::Left, JointKind::Knee),
        Joint::new(Leg::Left, JointKind::Ankle),
        Joint::new(Leg::Right, JointKind::Hip),
        Joint::new(Leg::Right, JointKind::Knee),
        Joint::new(Leg::Right, JointKind::Ankle),
    ];

    pub const fn new(leg: Leg, kind: JointKind) -> Self {
        Joint { leg, kind }
    }

    pub fn index(self) -> usize {
        self.leg.index() * 3 + self.kind.index()
    }

    pub fn from_index(i: usize) -> Joint {
        Joint::ALL[i]
    }

    /// Column-friendly name such as `l_hip`.
    pub fn name(self) -> String {
        format!("{}_{}", self.leg.name(), self.kind.name())
    }
}

/// An ordered six-joint quantity (angles in rad, velocities in rad/s or torques in Nm).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JointVector(pub [f64; NUM_JOINTS]);

impl JointVector {
    pub const ZERO: JointVector = JointVector([0.0; NUM_JOINTS]);

    pub fn splat(v: f64) -> Self {
        JointVector([v; NUM_JOINTS])
    }

    pub fn from_fn(f: impl FnMut(usize) -> f64) -> Self {
        JointVector(std::array::from_fn(f))
    }

    /// Builds a vector from per-kind values applied identically to both legs.
    pub fn symmetric(hip: f64, knee: f64, ankle: f64) -> Self {
        JointVector([hip, knee, ankle, hip, knee, ankle])
    }

    pub fn map(self, mut f: impl FnMut(f64) -> f64) -> Self {
        JointVector(self.0.map(&mut f))
    }

    pub fn zip_with(self, other: Self, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        JointVector::from_fn(|i| f(self.0[i], other.0[i]))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn leg(&self, leg: Leg) -> [f64; 3] {
        let o = leg.index() * 3;
        [self.0[o], self.0[o + 1], self.0[o + 2]]
    }

    pub fn set_leg(&mut self, leg: Leg, values: [f64; 3]) {
        let o = leg.index() * 3;
        self.0[o..o + 3].copy_from_slice(&values);
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.0.iter()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

impl Index<usize> for JointVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for JointVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Index<Joint> for JointVector {
    type Output = f64;
    fn index(&self, j: Joint) -> &f64 {
        &self.0[j.index()]
    }
}

impl IndexMut<Joint> for JointVector {
    fn index_mut(&mut self, j: Joint) -> &mut f64 {
        &mut self.0[j.index()]
    }
}

impl Add for JointVector {
    type Output = JointVector;
    fn add(self, rhs: Self) -> Self {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl AddAssign for JointVector {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl Sub for JointVector {
    type Output = JointVector;
    fn sub(self, rhs: Self) -> Self {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for JointVector {
    type Output = JointVector;
    fn mul(self, k: f64) -> Self {
        self.map(|v| v * k)
    }
}

impl Neg for JointVector {
    type Output = JointVector;
    fn neg(self) -> Self {
        self.map(|v| -v)
    }
}

impl From<[f64; NUM_JOINTS]> for JointVector {
    fn from(a: [f64; NUM_JOINTS]) -> Self {
        JointVector(a)
    }
}
