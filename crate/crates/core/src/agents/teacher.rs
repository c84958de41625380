//! The teacher: a live walker or a replayed recording, optionally with a
//! consistent left-right asymmetry and obstacle step-overs.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agents::noise::SmoothNoise;
use crate::agents::pattern::{contact_schedule, leg_phase, GaitPattern, STANCE_FRACTION};
use crate::agents::trajectory::GaitTrajectory;
use crate::error::{Error, Result};
use crate::exo::kinematics::foot_clearance_on;
use crate::exo::params::ExoParams;
use crate::joint::{Joint, JointKind, JointVector, Leg};

/// Knee-to-hip ratio of the obstacle clearance bump.
pub const OBSTACLE_KNEE_RATIO: f64 = 0.6;
/// Width of the asymmetry window around peak flexion, cycle fraction.
pub const ASYMMETRY_WIDTH: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Obstacle {
    /// Time the obstacle is announced; the next swing of the stepping leg clears it, s.
    pub time: f64,
    /// Extra toe clearance on that swing, m.
    pub boost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TeacherSpec {
    /// Teacher cadence relative to the student's nominal cadence.
    pub cadence_ratio: f64,
    /// Relative standard deviation of cadence fluctuations.
    pub cadence_noise: f64,
    /// Correlation time of cadence fluctuations, s.
    pub cadence_noise_tau: f64,
    /// Left minus right peak flexion for hip, knee and ankle, deg.
    pub asymmetry_deg: [f64; 3],
    pub obstacles: Vec<Obstacle>,
    pub obstacle_leg: Leg,
    /// Starting stride phase; drawn from the scenario seed when absent.
    pub initial_phase: Option<f64>,
}

impl Default for TeacherSpec {
    fn default() -> Self {
        TeacherSpec {
            cadence_ratio: 1.06,
            cadence_noise: 0.02,
            cadence_noise_tau: 2.0,
            asymmetry_deg: [0.0; 3],
            obstacles: Vec::new(),
            obstacle_leg: Leg::Right,
            initial_phase: None,
        }
    }
}

impl TeacherSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.cadence_ratio.is_finite() && self.cadence_ratio > 0.0) {
            return Err(Error::param("teacher.cadence_ratio", "must be > 0"));
        }
        if !(self.cadence_noise >= 0.0 && self.cadence_noise_tau > 0.0) {
            return Err(Error::param("teacher.cadence_noise", "std must be >= 0 and tau > 0"));
        }
        if self.asymmetry_deg.iter().any(|d| !d.is_finite() || d.abs() > 60.0) {
            return Err(Error::param("teacher.asymmetry_deg", "must be finite and within 60 deg"));
        }
        for o in &self.obstacles {
            if !(o.time.is_finite() && o.time >= 0.0 && o.boost.is_finite() && o.boost >= 0.0) {
                return Err(Error::param("teacher.obstacles", "time and boost must be >= 0"));
            }
        }
        Ok(())
    }
}

/// Where the teacher's angles come from.
#[derive(Debug, Clone, PartialEq)]
pub enum TeacherSource {
    Live(GaitPattern),
    /// Recorded cycle starting at a left heel strike, looped.
    Playback(GaitTrajectory),
}

#[derive(Debug, Clone, Copy)]
struct Window {
    center: f64,
    delta: f64,
}

impl Window {
    fn weight(&self, psi: f64) -> f64 {
        let d = (psi - self.center + 0.5).rem_euclid(1.0) - 0.5;
        if d.abs() >= 0.5 * ASYMMETRY_WIDTH {
            0.0
        } else {
            0.5 * (1.0 + (2.0 * PI * d / ASYMMETRY_WIDTH).cos())
        }
    }
}

fn swing_weight(psi: f64) -> f64 {
    if psi < STANCE_FRACTION {
        0.0
    } else {
        let x = (psi - STANCE_FRACTION) / (1.0 - STANCE_FRACTION);
        0.5 * (1.0 - (2.0 * PI * x).cos())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmedObstacle {
    /// Stride cycle (integer part of the stepping leg's unwrapped phase).
    pub cycle: i64,
    pub leg: Leg,
    /// Hip bump amplitude, rad; the knee gets `OBSTACLE_KNEE_RATIO` times this.
    pub hip: f64,
    pub boost: f64,
}

#[derive(Debug, Clone)]
pub struct Teacher {
    spec: TeacherSpec,
    source: TeacherSource,
    exo: ExoParams,
    frequency: f64,
    start_phase: f64,
    drift: f64,
    time: f64,
    noise: SmoothNoise,
    windows: [[Window; 3]; 2],
    next_obstacle: usize,
    armed: Vec<ArmedObstacle>,
}

impl Teacher {
    pub fn new<R: Rng + ?Sized>(spec: TeacherSpec, source: TeacherSource, exo: ExoParams, rng: &mut R) -> Result<Self> {
        spec.validate()?;
        let frequency = match &source {
            TeacherSource::Live(p) => p.stride_frequency() * spec.cadence_ratio,
            TeacherSource::Playback(tr) => 1.0 / tr.duration(),
        };
        let start_phase = match spec.initial_phase {
            Some(p) => p,
            None => rng.random::<f64>(),
        };
        let noise = SmoothNoise::new(spec.cadence_noise, spec.cadence_noise_tau, 0.0).warm(rng);
        let mut obstacles = spec.obstacles.clone();
        obstacles.sort_by(|a, b| a.time.total_cmp(&b.time));
        let mut teacher = Teacher {
            spec: TeacherSpec { obstacles, ..spec },
            source,
            exo,
            frequency,
            start_phase,
            drift: 0.0,
            time: 0.0,
            noise,
            windows: [[Window { center: 0.0, delta: 0.0 }; 3]; 2],
            next_obstacle: 0,
            armed: Vec::new(),
        };
        teacher.windows = teacher.calibrate_asymmetry();
        teacher.arm_due();
        Ok(teacher)
    }

    pub fn spec(&self) -> &TeacherSpec {
        &self.spec
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Unwrapped stride phase (left heel strike at integers).
    pub fn phase(&self) -> f64 {
        self.start_phase + self.frequency * self.time + self.drift
    }

    pub fn armed_obstacles(&self) -> &[ArmedObstacle] {
        &self.armed
    }

    /// Integrates cadence fluctuations up to time `t`.
    pub fn advance_to<R: Rng + ?Sized>(&mut self, t: f64, rng: &mut R) {
        if t > self.time {
            let dt = t - self.time;
            let n = self.noise.value();
            self.drift += self.frequency * n * dt;
            self.noise.step(dt, rng);
            self.time = t;
        }
        self.arm_due();
    }

    /// Joint angles at the current time.
    pub fn angles(&self) -> JointVector {
        self.angles_at_phase(self.phase())
    }

    pub fn contact(&self) -> [bool; 2] {
        contact_schedule(self.phase().rem_euclid(1.0)).0
    }

    /// Source angles without shaping.
    fn base(&self, phase: f64) -> JointVector {
        match &self.source {
            TeacherSource::Live(p) => p.angles(phase),
            TeacherSource::Playback(tr) => tr.sample(phase.rem_euclid(1.0) * tr.duration()),
        }
    }

    fn shaped(&self, phase: f64) -> JointVector {
        let mut q = self.base(phase);
        for leg in Leg::BOTH {
            let psi = leg_phase(leg, phase);
            for kind in JointKind::ALL {
                let w = self.windows[leg.index()][kind.index()];
                q[Joint::new(leg, kind)] += w.delta * w.weight(psi);
            }
        }
        q
    }

    /// Angles at an unwrapped stride phase, including armed obstacle bumps.
    pub fn angles_at_phase(&self, phase: f64) -> JointVector {
        let mut q = self.shaped(phase);
        for a in &self.armed {
            let lp = phase + 0.5 * a.leg.index() as f64;
            if lp.floor() as i64 == a.cycle {
                let w = swing_weight(lp.rem_euclid(1.0));
                q[Joint::new(a.leg, JointKind::Hip)] += a.hip * w;
                q[Joint::new(a.leg, JointKind::Knee)] += OBSTACLE_KNEE_RATIO * a.hip * w;
            }
        }
        q
    }

    fn peak(&self, leg: Leg, kind: JointKind, window: Window) -> f64 {
        let j = Joint::new(leg, kind);
        let n = 1000;
        (0..n)
            .map(|k| {
                let psi = k as f64 / n as f64;
                let phase = psi - 0.5 * leg.index() as f64;
                self.base(phase)[j] + window.delta * window.weight(psi)
            })
            .fold(f64::MIN, f64::max)
    }

    fn peak_phase(&self, leg: Leg, kind: JointKind) -> f64 {
        let j = Joint::new(leg, kind);
        let n = 1000;
        (0..n)
            .map(|k| k as f64 / n as f64)
            .max_by(|a, b| {
                let qa = self.base(a - 0.5 * leg.index() as f64)[j];
                let qb = self.base(b - 0.5 * leg.index() as f64)[j];
                qa.total_cmp(&qb)
            })
            .unwrap_or(0.0)
    }

    /// The right leg is lowered by half the requested difference at peak
    /// flexion and the left leg raised until the peak difference matches.
    fn calibrate_asymmetry(&self) -> [[Window; 3]; 2] {
        let mut out = [[Window { center: 0.0, delta: 0.0 }; 3]; 2];
        for kind in JointKind::ALL {
            let d = self.spec.asymmetry_deg[kind.index()].to_radians();
            let right = Window {
                center: self.peak_phase(Leg::Right, kind),
                delta: -0.5 * d,
            };
            let mut left = Window {
                center: self.peak_phase(Leg::Left, kind),
                delta: 0.0,
            };
            if d != 0.0 {
                let target = self.peak(Leg::Right, kind, right) + d;
                let (mut lo, mut hi) = (-3.0 * d.abs(), 3.0 * d.abs());
                for _ in 0..60 {
                    left.delta = 0.5 * (lo + hi);
                    if self.peak(Leg::Left, kind, left) > target {
                        hi = left.delta;
                    } else {
                        lo = left.delta;
                    }
                }
            }
            out[Leg::Left.index()][kind.index()] = left;
            out[Leg::Right.index()][kind.index()] = right;
        }
        out
    }

    fn arm_due(&mut self) {
        while let Some(o) = self.spec.obstacles.get(self.next_obstacle).copied() {
            if o.time > self.time {
                break;
            }
            self.next_obstacle += 1;
            let leg = self.spec.obstacle_leg;
            let lp = self.phase() + 0.5 * leg.index() as f64;
            let mut cycle = lp.floor() as i64;
            if lp.rem_euclid(1.0) >= STANCE_FRACTION || self.armed.iter().any(|a| a.cycle == cycle && a.leg == leg) {
                cycle += 1;
            }
            while self.armed.iter().any(|a| a.cycle == cycle && a.leg == leg) {
                cycle += 1;
            }
            let hip = self.size_obstacle_bump(leg, cycle, o.boost);
            self.armed.push(ArmedObstacle {
                cycle,
                leg,
                hip,
                boost: o.boost,
            });
        }
    }

    /// Largest toe elevation of `leg` over the swing of `cycle` caused by a
    /// hip bump of `hip` rad, relative to the same swing without it.
    fn swing_elevation(&self, leg: Leg, cycle: i64, hip: f64) -> f64 {
        let n = 60;
        (0..=n)
            .map(|k| {
                let psi = STANCE_FRACTION + (1.0 - STANCE_FRACTION) * k as f64 / n as f64;
                let phase = cycle as f64 + psi - 0.5 * leg.index() as f64;
                let contact = contact_schedule(phase.rem_euclid(1.0)).0;
                let plain = self.shaped(phase);
                let mut q = plain;
                let w = swing_weight(psi);
                q[Joint::new(leg, JointKind::Hip)] += hip * w;
                q[Joint::new(leg, JointKind::Knee)] += OBSTACLE_KNEE_RATIO * hip * w;
                foot_clearance_on(&q, &self.exo, contact)[leg.index()]
                    - foot_clearance_on(&plain, &self.exo, contact)[leg.index()]
            })
            .fold(f64::MIN, f64::max)
    }

    /// Hip bump (rad) whose swing raises the toe by `boost` at its highest.
    fn size_obstacle_bump(&self, leg: Leg, cycle: i64, boost: f64) -> f64 {
        if boost <= 0.0 {
            return 0.0;
        }
        let (mut lo, mut hi) = (0.0, 80f64.to_radians());
        for _ in 0..50 {
            let mid = 0.5 * (lo + hi);
            if self.swing_elevation(leg, cycle, mid) < boost {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Toe elevation produced by the obstacle armed for `leg` on `cycle`, m.
    pub fn swing_clearance_gain(&self, leg: Leg, cycle: i64) -> f64 {
        let bump = self
            .armed
            .iter()
            .find(|a| a.leg == leg && a.cycle == cycle)
            .map_or(0.0, |a| a.hip);
        self.swing_elevation(leg, cycle, bump)
    }
}
