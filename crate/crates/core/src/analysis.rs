//! Offline gait analysis over simulation logs: heel-strike segmentation,
//! cycle normalisation, interaction-torque statistics, stiffness fits,
//! teacher-student correlations and foot clearance.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exo::kinematics::foot_clearance_on;
use crate::exo::ExoParams;
use crate::impedance::{effective_stiffness, StiffnessFit};
use crate::joint::{Joint, JointKind, JointVector, Leg, NUM_JOINTS};
use crate::numeric::{interp, mean, pearson, std_dev};
use crate::sim::LogRow;

/// Points per normalised cycle (0 to 100 %).
pub const GRID: usize = 101;
/// Minimum time between heel strikes, s.
pub const MIN_STEP: f64 = 0.3;
/// A contact change must persist this long to count, s.
pub const CONTACT_HOLD: f64 = 0.03;
/// Teacher strides raised by more than this are treated as obstacle steps, m.
pub const OBSTACLE_THRESHOLD: f64 = 0.05;

/// Whose signals to read from a log.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Walker {
    /// Exoskeleton wearer: `theta_act` and the plant contacts.
    Student,
    /// Desired trajectory: `theta_des` and the teacher contacts.
    Teacher,
}

/// Debounced rising edges of a contact flag.
pub fn heel_strikes(times: &[f64], contact: &[bool]) -> Vec<f64> {
    let mut strikes: Vec<f64> = Vec::new();
    let Some(&first) = contact.first() else {
        return strikes;
    };
    let mut state = first;
    let mut i = 1;
    while i < contact.len() {
        if contact[i] == state {
            i += 1;
            continue;
        }
        let t0 = times[i];
        let mut j = i;
        while j < contact.len() && contact[j] != state && times[j] < t0 + CONTACT_HOLD - 1e-9 {
            j += 1;
        }
        let held = j == contact.len() || contact[j] != state;
        if !held {
            i = j;
            continue;
        }
        state = !state;
        if state && strikes.last().is_none_or(|&s| t0 - s >= MIN_STEP) {
            strikes.push(t0);
        }
        i = j;
    }
    strikes
}

fn contact_of(row: &LogRow, walker: Walker, leg: Leg) -> bool {
    match walker {
        Walker::Student => row.contact[leg.index()],
        Walker::Teacher => row.teacher_contact[leg.index()],
    }
}

fn angles_of(row: &LogRow, walker: Walker) -> JointVector {
    match walker {
        Walker::Student => row.theta_act,
        Walker::Teacher => row.theta_des,
    }
}

/// The row carries a desired trajectory (not transparent, no fallback).
pub fn has_source(row: &LogRow) -> bool {
    row.mode != 0 && !row.fallback
}

/// Heel strikes of the student's `leg`.
pub fn detect_heel_strikes(rows: &[LogRow], leg: Leg) -> Vec<f64> {
    detect_walker_strikes(rows, Walker::Student, leg)
}

pub fn detect_walker_strikes(rows: &[LogRow], walker: Walker, leg: Leg) -> Vec<f64> {
    let times: Vec<f64> = rows.iter().map(|r| r.time).collect();
    let flags: Vec<bool> = rows.iter().map(|r| contact_of(r, walker, leg)).collect();
    heel_strikes(&times, &flags)
}

/// Linear resampling of `ys(times)` over `[start, end]` onto the cycle grid.
pub fn normalize(times: &[f64], ys: &[f64], start: f64, end: f64) -> Vec<f64> {
    (0..GRID)
        .map(|k| interp(times, ys, start + (end - start) * k as f64 / (GRID - 1) as f64))
        .collect()
}

/// One heel-strike-to-heel-strike interval on the 101-point grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepSegment {
    pub leg: Leg,
    pub start: f64,
    pub end: f64,
    pub samples: Vec<JointVector>,
}

impl StepSegment {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }

    /// The 101 values of one joint.
    pub fn channel(&self, joint: Joint) -> Vec<f64> {
        self.samples.iter().map(|q| q[joint]).collect()
    }
}

/// Resamples every complete inter-strike interval of `signal`.
pub fn segment_and_normalize(times: &[f64], signal: &[JointVector], strikes: &[f64], leg: Leg) -> Vec<StepSegment> {
    let (Some(&t_first), Some(&t_last)) = (times.first(), times.last()) else {
        return Vec::new();
    };
    let channels: Vec<Vec<f64>> = (0..NUM_JOINTS).map(|i| signal.iter().map(|q| q[i]).collect()).collect();
    strikes
        .windows(2)
        .filter(|w| w[1] - w[0] > MIN_STEP && w[0] >= t_first && w[1] <= t_last)
        .map(|w| {
            let per_joint: Vec<Vec<f64>> = channels.iter().map(|c| normalize(times, c, w[0], w[1])).collect();
            StepSegment {
                leg,
                start: w[0],
                end: w[1],
                samples: (0..GRID).map(|k| JointVector::from_fn(|i| per_joint[i][k])).collect(),
            }
        })
        .collect()
}

/// Segments of one walker's joint angles by that walker's own heel strikes.
pub fn walker_segments(rows: &[LogRow], walker: Walker, leg: Leg) -> Vec<StepSegment> {
    let times: Vec<f64> = rows.iter().map(|r| r.time).collect();
    let signal: Vec<JointVector> = rows.iter().map(|r| angles_of(r, walker)).collect();
    segment_and_normalize(&times, &signal, &detect_walker_strikes(rows, walker, leg), leg)
}

/// Per-phase mean and standard deviation across segments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseBands {
    pub mean: Vec<JointVector>,
    pub std: Vec<JointVector>,
    pub count: usize,
}

pub fn phase_bands(segments: &[StepSegment]) -> Result<PhaseBands> {
    if segments.is_empty() {
        return Err(Error::InsufficientData("no complete steps".into()));
    }
    let mut m = Vec::with_capacity(GRID);
    let mut s = Vec::with_capacity(GRID);
    for k in 0..GRID {
        let col = |i: usize| -> Vec<f64> { segments.iter().map(|seg| seg.samples[k][i]).collect() };
        m.push(JointVector::from_fn(|i| mean(&col(i))));
        s.push(JointVector::from_fn(|i| std_dev(&col(i))));
    }
    Ok(PhaseBands {
        mean: m,
        std: s,
        count: segments.len(),
    })
}

/// Mean cycle of the student's angles between `leg` heel strikes and the mean
/// cycle duration.
pub fn average_cycle(rows: &[LogRow], leg: Leg) -> Result<(Vec<JointVector>, f64)> {
    let segs = walker_segments(rows, Walker::Student, leg);
    let bands = phase_bands(&segs)?;
    let period = mean(&segs.iter().map(StepSegment::duration).collect::<Vec<_>>());
    Ok((bands.mean, period))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    fn of(xs: &[f64]) -> MeanStd {
        MeanStd {
            mean: mean(xs),
            std: std_dev(xs),
        }
    }
}

/// Mean and standard deviation of `|tau| / body_mass` per joint kind, each
/// segment contributing its own leg's joints.
pub fn transparency_stats(segments: &[StepSegment], body_mass: f64) -> Result<[MeanStd; 3]> {
    if !(body_mass.is_finite() && body_mass > 0.0) {
        return Err(Error::param("body_mass", format!("must be > 0 kg, got {body_mass}")));
    }
    if segments.is_empty() {
        return Err(Error::InsufficientData("no complete steps".into()));
    }
    Ok(JointKind::ALL.map(|kind| {
        let xs: Vec<f64> = segments
            .iter()
            .flat_map(|s| {
                let j = Joint::new(s.leg, kind);
                s.samples.iter().map(move |q| q[j].abs() / body_mass)
            })
            .collect();
        MeanStd::of(&xs)
    }))
}

/// Interaction-torque segments of a log, both legs.
pub fn interaction_segments(rows: &[LogRow]) -> Vec<StepSegment> {
    let times: Vec<f64> = rows.iter().map(|r| r.time).collect();
    let tau: Vec<JointVector> = rows.iter().map(|r| r.tau_int).collect();
    Leg::BOTH
        .iter()
        .flat_map(|&leg| segment_and_normalize(&times, &tau, &detect_heel_strikes(rows, leg), leg))
        .collect()
}

/// A student step and the teacher's trajectory over the same time window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CyclePair {
    pub student: StepSegment,
    pub teacher: StepSegment,
    /// Fraction of the step during which a teacher trajectory was available.
    pub overlap: f64,
}

/// Pairs each student step with the teacher signal over the same window,
/// keeping steps where the teacher was present for more than half the step.
pub fn pair_steps(rows: &[LogRow]) -> Vec<CyclePair> {
    let times: Vec<f64> = rows.iter().map(|r| r.time).collect();
    let student: Vec<JointVector> = rows.iter().map(|r| r.theta_act).collect();
    let teacher: Vec<JointVector> = rows.iter().map(|r| r.theta_des).collect();
    let mut pairs = Vec::new();
    for leg in Leg::BOTH {
        for s in segment_and_normalize(&times, &student, &detect_heel_strikes(rows, leg), leg) {
            let inside: Vec<&LogRow> = rows.iter().filter(|r| r.time >= s.start && r.time < s.end).collect();
            let overlap = inside.iter().filter(|r| has_source(r)).count() as f64 / inside.len().max(1) as f64;
            if overlap <= 0.5 {
                continue;
            }
            let t = segment_and_normalize(&times, &teacher, &[s.start, s.end], leg)
                .pop()
                .expect("window already validated");
            pairs.push(CyclePair {
                student: s,
                teacher: t,
                overlap,
            });
        }
    }
    pairs.sort_by(|a, b| a.student.start.total_cmp(&b.student.start));
    pairs
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationStats {
    pub mean: f64,
    pub std: f64,
    pub pairs: usize,
    pub excluded: usize,
}

/// Zero-lag Pearson correlation per pair and joint kind (each pair on its own
/// leg), then mean and standard deviation across pairs.
pub fn step_correlations(pairs: &[CyclePair]) -> Result<[CorrelationStats; 3]> {
    if pairs.is_empty() {
        return Err(Error::InsufficientData("no step pairs".into()));
    }
    Ok(JointKind::ALL.map(|kind| {
        let mut rhos = Vec::new();
        let mut excluded = 0;
        for p in pairs {
            let j = Joint::new(p.student.leg, kind);
            match pearson(&p.student.channel(j), &p.teacher.channel(j)) {
                Some(r) => rhos.push(r),
                None => excluded += 1,
            }
        }
        CorrelationStats {
            mean: if rhos.is_empty() { f64::NAN } else { mean(&rhos) },
            std: std_dev(&rhos),
            pairs: rhos.len(),
            excluded,
        }
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StiffnessReport {
    /// Pre-limit desired torque against tracking error, legs pooled.
    pub fit: [StiffnessFit; 3],
    /// Largest pre-limit desired-torque rate over body mass, Nm/(kg s).
    pub max_torque_rate: [f64; 3],
    pub samples: usize,
}

/// Rendered stiffness and peak normalised torque rate over rows with a source.
pub fn effective_stiffness_report(rows: &[LogRow], body_mass: f64) -> Result<StiffnessReport> {
    if !(body_mass.is_finite() && body_mass > 0.0) {
        return Err(Error::param("body_mass", format!("must be > 0 kg, got {body_mass}")));
    }
    let used: Vec<&LogRow> = rows.iter().filter(|r| has_source(r)).collect();
    let mut fit = [StiffnessFit {
        slope: 0.0,
        r_squared: 0.0,
    }; 3];
    let mut max_rate = [0.0; 3];
    for kind in JointKind::ALL {
        let mut e = Vec::new();
        let mut tau = Vec::new();
        for leg in Leg::BOTH {
            let j = Joint::new(leg, kind);
            e.extend(used.iter().map(|r| r.theta_e[j]));
            tau.extend(used.iter().map(|r| r.tau_pre[j]));
        }
        fit[kind.index()] = effective_stiffness(&e, &tau)?;
        let mut peak: f64 = 0.0;
        for w in rows.windows(2) {
            if has_source(&w[0]) && has_source(&w[1]) {
                for leg in Leg::BOTH {
                    let j = Joint::new(leg, kind);
                    peak = peak.max((w[1].tau_pre[j] - w[0].tau_pre[j]).abs() / (w[1].time - w[0].time));
                }
            }
        }
        max_rate[kind.index()] = peak / body_mass;
    }
    Ok(StiffnessReport {
        fit,
        max_torque_rate: max_rate,
        samples: used.len(),
    })
}

/// Largest per-sample slope of the rate-limited desired torque, Nm/s.
pub fn max_torque_slope(rows: &[LogRow]) -> f64 {
    rows.windows(2)
        .map(|w| (w[1].tau_des - w[0].tau_des).max_abs() / (w[1].time - w[0].time))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepClearance {
    pub leg: Leg,
    pub start: f64,
    pub end: f64,
    /// Highest toe point during swing, m.
    pub max_swing: f64,
    /// Largest rise over the typical stride at the same phase, m.
    pub elevation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClearanceReport {
    pub walker: Walker,
    pub times: Vec<f64>,
    pub series: Vec<[f64; 2]>,
    pub steps: Vec<StepClearance>,
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Longest run without contact inside a stride window, else the whole window.
fn swing_interval(rows: &[LogRow], walker: Walker, leg: Leg, w: [f64; 2]) -> [f64; 2] {
    let mut best = (0.0, w);
    let mut start = None;
    for r in rows.iter().filter(|r| r.time >= w[0] && r.time <= w[1]) {
        let off = !contact_of(r, walker, leg) && r.time < w[1];
        match (off, start) {
            (true, None) => start = Some(r.time),
            (false, Some(s)) => {
                if r.time - s > best.0 {
                    best = (r.time - s, [s, r.time]);
                }
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        if w[1] - s > best.0 {
            best = (w[1] - s, [s, w[1]]);
        }
    }
    if best.0 > 0.0 {
        best.1
    } else {
        w
    }
}

/// Toe clearance of one walker (vertical trunk, supporting foot as ground)
/// with per-stride swing maxima and elevation over the median swing profile.
pub fn foot_clearance(rows: &[LogRow], exo: &ExoParams, walker: Walker) -> ClearanceReport {
    let times: Vec<f64> = rows.iter().map(|r| r.time).collect();
    let series: Vec<[f64; 2]> = rows
        .iter()
        .map(|r| {
            let contact = [contact_of(r, walker, Leg::Left), contact_of(r, walker, Leg::Right)];
            foot_clearance_on(&angles_of(r, walker), exo, contact)
        })
        .collect();
    let mut steps = Vec::new();
    for leg in Leg::BOTH {
        let c: Vec<f64> = series.iter().map(|s| s[leg.index()]).collect();
        let strikes = detect_walker_strikes(rows, walker, leg);
        let windows: Vec<[f64; 2]> = strikes
            .windows(2)
            .filter(|w| w[1] - w[0] > MIN_STEP)
            .map(|w| [w[0], w[1]])
            .collect();
        let swings: Vec<[f64; 2]> = windows.iter().map(|w| swing_interval(rows, walker, leg, *w)).collect();
        let profiles: Vec<Vec<f64>> = swings.iter().map(|w| normalize(&times, &c, w[0], w[1])).collect();
        if profiles.is_empty() {
            continue;
        }
        let typical: Vec<f64> = (0..GRID).map(|k| median(profiles.iter().map(|p| p[k]).collect())).collect();
        for (w, p) in windows.iter().zip(&profiles) {
            let max_swing = rows
                .iter()
                .zip(&c)
                .filter(|(r, _)| r.time >= w[0] && r.time < w[1] && !contact_of(r, walker, leg))
                .map(|(_, v)| *v)
                .fold(0.0, f64::max);
            let elevation = p.iter().zip(&typical).map(|(a, b)| a - b).fold(f64::MIN, f64::max);
            steps.push(StepClearance {
                leg,
                start: w[0],
                end: w[1],
                max_swing,
                elevation,
            });
        }
    }
    steps.sort_by(|a, b| a.start.total_cmp(&b.start));
    ClearanceReport {
        walker,
        times,
        series,
        steps,
    }
}

/// A raised teacher stride and the student stride that overlaps it most.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObstacleResponse {
    pub teacher: StepClearance,
    pub student: Option<StepClearance>,
}

impl ObstacleResponse {
    /// Student elevation over teacher elevation.
    pub fn transfer(&self) -> f64 {
        self.student.as_ref().map_or(0.0, |s| s.elevation / self.teacher.elevation)
    }
}

fn overlap(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.1.min(b.1) - a.0.max(b.0)).max(0.0)
}

pub fn obstacle_responses(teacher: &ClearanceReport, student: &ClearanceReport) -> Vec<ObstacleResponse> {
    teacher
        .steps
        .iter()
        .filter(|s| s.elevation > OBSTACLE_THRESHOLD)
        .map(|t| {
            let best = student
                .steps
                .iter()
                .filter(|s| s.leg == t.leg)
                .map(|s| (overlap((s.start, s.end), (t.start, t.end)), s))
                .filter(|(o, _)| *o > 0.0)
                .max_by(|a, b| a.0.total_cmp(&b.0))
                .map(|(_, s)| s.clone());
            ObstacleResponse {
                teacher: t.clone(),
                student: best,
            }
        })
        .collect()
}

/// Mean over strides of each leg's peak angle, per joint kind, rad.
pub fn peak_flexion(rows: &[LogRow], walker: Walker) -> Result<[[f64; 3]; 2]> {
    let mut out = [[0.0; 3]; 2];
    for leg in Leg::BOTH {
        let segs = walker_segments(rows, walker, leg);
        if segs.is_empty() {
            return Err(Error::InsufficientData(format!("no complete {} steps", leg.name())));
        }
        for kind in JointKind::ALL {
            let j = Joint::new(leg, kind);
            let peaks: Vec<f64> = segs
                .iter()
                .map(|s| s.channel(j).into_iter().fold(f64::MIN, f64::max))
                .collect();
            out[leg.index()][kind.index()] = mean(&peaks);
        }
    }
    Ok(out)
}

/// Left minus right peak flexion per joint kind, deg.
pub fn peak_asymmetry_deg(rows: &[LogRow], walker: Walker) -> Result<[f64; 3]> {
    let p = peak_flexion(rows, walker)?;
    Ok(JointKind::ALL.map(|k| (p[0][k.index()] - p[1][k.index()]).to_degrees()))
}
