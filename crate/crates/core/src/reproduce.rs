//! Canonical scenario batteries for each reproduced figure and table, with a
//! comparison against their reference values.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use crate::agents::{Obstacle, StudentSpec};
use crate::error::{Error, Result};
use crate::sim::{run_scenario, ScenarioKind, ScenarioSpec, SimLog};
use crate::summary::{summarize, Metrics, Summary};

pub const DEFAULT_SEED: u64 = 1;
/// Length of every canonical run, s.
pub const RUN_DURATION: f64 = 180.0;
pub const SPEEDS: [f64; 3] = [0.5, 1.1, 1.5];
pub const COUPLED_SPEED: f64 = 1.1;
pub const TRANSFER_SPEED: f64 = 0.7;
pub const TEACHER_ASYMMETRY_DEG: [f64; 3] = [40.0, 16.0, 23.0];
pub const OBSTACLES: [Obstacle; 2] = [Obstacle { time: 60.0, boost: 0.21 }, Obstacle { time: 75.0, boost: 0.20 }];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Figure {
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Table2,
}

impl Figure {
    pub const ALL: [Figure; 5] = [Figure::Fig4, Figure::Fig5, Figure::Fig6, Figure::Fig7, Figure::Table2];

    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
            Figure::Fig6 => "fig6",
            Figure::Fig7 => "fig7",
            Figure::Table2 => "table2",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Figure::Fig4 => "effective stiffness and torque rate under virtual-teacher playback",
            Figure::Fig5 => "transparency of the compensated exoskeleton",
            Figure::Fig6 => "asymmetric gait transfer",
            Figure::Fig7 => "obstacle clearance transfer",
            Figure::Table2 => "teacher-student step correlations",
        }
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Figure> {
        Figure::ALL.into_iter().find(|f| f.name() == s).ok_or_else(|| Error::Config {
            path: "figure".into(),
            message: format!(
                "unknown figure `{s}` (expected one of {})",
                Figure::ALL.map(Figure::name).join(", ")
            ),
        })
    }
}

/// Student for the playback battery: walks its own stride-to-stride
/// variability and leaves the guidance to the exoskeleton.
pub fn playback_student() -> StudentSpec {
    StudentSpec {
        stiffness: [320.0, 240.0, 160.0],
        damping: [12.0, 9.0, 4.5],
        compliance: 0.0,
        cadence_noise: 0.0,
        angle_noise_deg: 0.2,
        amplitude_noise: 0.3,
        ..StudentSpec::default()
    }
}

fn speed_tag(v: f64) -> String {
    format!("{v:.1}").replace('.', "p")
}

/// Scenario specs of a figure's battery, all sharing `seed`.
pub fn battery(figure: Figure, seed: u64) -> Vec<ScenarioSpec> {
    let d = RUN_DURATION;
    match figure {
        Figure::Fig4 => SPEEDS
            .iter()
            .flat_map(|&v| {
                ["Z_constant", "Z_designed"].map(|z| {
                    let id = format!("fig4-{}-{}", z.trim_start_matches("Z_"), speed_tag(v));
                    let mut s = ScenarioSpec::new(id, ScenarioKind::VirtualTeacherPlayback, v, d, z, seed);
                    s.student = playback_student();
                    s
                })
            })
            .collect(),
        Figure::Fig5 => SPEEDS
            .iter()
            .map(|&v| ScenarioSpec::new(format!("fig5-{}", speed_tag(v)), ScenarioKind::Transparency, v, d, "Z_zero", seed))
            .collect(),
        Figure::Table2 => ["Z_zero", "Z_soft", "Z_stiff"]
            .iter()
            .map(|z| {
                let id = format!("table2-{}", z.trim_start_matches("Z_"));
                ScenarioSpec::new(id, ScenarioKind::CoupledWalk, COUPLED_SPEED, d, z, seed)
            })
            .collect(),
        Figure::Fig6 => {
            let mut s = ScenarioSpec::new("fig6-asymmetric", ScenarioKind::AsymmetricWalk, TRANSFER_SPEED, d, "Z_stiff", seed);
            s.teacher.asymmetry_deg = TEACHER_ASYMMETRY_DEG;
            vec![s]
        }
        Figure::Fig7 => {
            let mut s = ScenarioSpec::new("fig7-obstacles", ScenarioKind::ObstacleWalk, TRANSFER_SPEED, d, "Z_stiff", seed);
            s.teacher.obstacles = OBSTACLES.to_vec();
            vec![s]
        }
    }
}

pub struct Run {
    pub spec: ScenarioSpec,
    pub log: SimLog,
    pub summary: Summary,
}

/// Runs independent scenarios on separate threads; results keep input order.
pub fn run_all(specs: &[ScenarioSpec]) -> Result<Vec<Run>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = specs
            .iter()
            .map(|spec| {
                scope.spawn(move || {
                    let log = run_scenario(spec)?;
                    let summary = summarize(spec, &log);
                    Ok(Run {
                        spec: spec.clone(),
                        log,
                        summary,
                    })
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scenario thread panicked"))
            .collect()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub number: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureReport {
    pub figure: Figure,
    pub seed: u64,
    pub runs: Vec<Summary>,
    /// Simulated value next to its reference value.
    pub comparison: Vec<String>,
    pub criteria: Vec<CriterionResult>,
}

impl FigureReport {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }

    pub fn text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}: {} (seed {})", self.figure.name(), self.figure.title(), self.seed);
        for line in &self.comparison {
            let _ = writeln!(out, "  {line}");
        }
        for c in &self.criteria {
            let verdict = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "  [{verdict}] criterion {} {}: {}", c.number, c.name, c.detail);
        }
        out
    }
}

fn find<'a>(runs: &'a [Summary], kind: ScenarioKind, impedance: &str, speed: f64) -> Option<&'a Summary> {
    runs.iter()
        .find(|s| s.kind == kind && s.impedance == impedance && (s.speed - speed).abs() < 1e-9)
}

fn criterion(number: u8, name: &'static str, passed: bool, detail: String) -> CriterionResult {
    CriterionResult {
        number,
        name,
        passed,
        detail,
    }
}

fn missing(number: u8, name: &'static str, what: &str) -> CriterionResult {
    criterion(number, name, false, format!("no usable {what}"))
}

/// Safety bounds over every log of the battery.
pub fn safety_criterion(runs: &[Summary]) -> CriterionResult {
    let worst = runs.iter().map(|s| s.max_torque_slope).fold(0.0, f64::max);
    let rom = runs.iter().all(|s| s.rom_respected);
    let faults = runs.iter().filter(|s| s.fault.is_some()).count();
    criterion(
        7,
        "safety bounds",
        worst <= 200.0 + 1e-9 && rom && faults == 0,
        format!("max torque slope {worst:.3} Nm/s, ROM respected: {rom}, faulted runs: {faults}"),
    )
}

fn stiffness(s: &Summary) -> Option<&crate::analysis::StiffnessReport> {
    match &s.metrics {
        Some(Metrics::Stiffness { report, .. }) => Some(report),
        _ => None,
    }
}

fn fig4(runs: &[Summary]) -> (Vec<String>, Vec<CriterionResult>) {
    const REF_SLOPE: [f64; 3] = [69.0, 60.0, 57.0];
    const REF_REDUCTION: [f64; 3] = [12.0, 14.0, 17.0];
    let kind = ScenarioKind::VirtualTeacherPlayback;
    let mut lines = Vec::new();
    let mut constant_ok = true;
    let mut slopes = Vec::new();
    let mut reductions = Vec::new();
    for (i, &v) in SPEEDS.iter().enumerate() {
        let c = find(runs, kind, "Z_constant", v).and_then(stiffness);
        let d = find(runs, kind, "Z_designed", v).and_then(stiffness);
        let (Some(c), Some(d)) = (c, d) else {
            constant_ok = false;
            continue;
        };
        constant_ok &= c.fit.iter().all(|f| (f.slope - 100.0).abs() <= 0.5 && f.r_squared > 0.999);
        let reduction = 100.0 * (1.0 - d.max_torque_rate[0] / c.max_torque_rate[0]);
        slopes.push(d.fit[0].slope);
        reductions.push(reduction);
        lines.push(format!(
            "{v} km/h hip: Z_constant {:.2} Nm/rad (r2 {:.4}), Z_designed {:.1} Nm/rad (r2 {:.2}, reference {}), \
             max rate {:.3} -> {:.3} Nm/(kg s), reduction {:.1}% (reference {}%)",
            c.fit[0].slope, c.fit[0].r_squared, d.fit[0].slope, d.fit[0].r_squared, REF_SLOPE[i],
            c.max_torque_rate[0], d.max_torque_rate[0], reduction, REF_REDUCTION[i]
        ));
    }
    let complete = slopes.len() == SPEEDS.len();
    let c4 = criterion(4, "constant-stiffness exactness", constant_ok && complete, format!("Z_constant slopes within 100 +/- 0.5 Nm/rad, r2 > 0.999: {constant_ok}"));
    let c5 = if complete {
        let inside = slopes.iter().all(|s| *s > 50.0 && *s < 100.0);
        let decreasing = slopes.windows(2).all(|w| w[1] < w[0]);
        criterion(5, "designed-impedance trend", inside && decreasing, format!("hip slopes {slopes:.1?} Nm/rad"))
    } else {
        missing(5, "designed-impedance trend", "playback fits")
    };
    let c6 = if complete {
        let enough = reductions.iter().all(|r| *r >= 5.0);
        let monotone = reductions.windows(2).all(|w| w[1] >= w[0]);
        criterion(6, "torque-rate reduction", enough && monotone, format!("hip reductions {reductions:.1?} %"))
    } else {
        missing(6, "torque-rate reduction", "playback fits")
    };
    (lines, vec![c4, c5, c6])
}

fn fig5(runs: &[Summary]) -> (Vec<String>, Vec<CriterionResult>) {
    let mut lines = Vec::new();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for &v in &SPEEDS {
        if let Some(Summary {
            metrics: Some(Metrics::Transparency { interaction, max_speed }),
            ..
        }) = find(runs, ScenarioKind::Transparency, "Z_zero", v)
        {
            count += 1;
            worst = interaction.iter().map(|m| m.mean).fold(worst, f64::max);
            lines.push(format!(
                "{v} km/h mean |tau_int|/m hip {:.4}, knee {:.4}, ankle {:.4} Nm/kg (reference 0.03-0.07); max speed {max_speed:.2} rad/s",
                interaction[0].mean, interaction[1].mean, interaction[2].mean
            ));
        }
    }
    let c = if count == SPEEDS.len() {
        criterion(11, "transparency budget", worst <= 0.02, format!("largest joint mean {worst:.4} Nm/kg"))
    } else {
        missing(11, "transparency budget", "transparency runs")
    };
    (lines, vec![c])
}

fn table2(runs: &[Summary]) -> (Vec<String>, Vec<CriterionResult>) {
    const REFERENCE: [[&str; 3]; 3] = [
        ["-0.00+/-0.556", "0.41+/-0.243", "0.61+/-0.158"],
        ["-0.01+/-0.362", "0.25+/-0.234", "0.28+/-0.224"],
        ["0.00+/-0.3", "0.35+/-0.221", "0.24+/-0.298"],
    ];
    let mut hip = Vec::new();
    let mut lines = Vec::new();
    for (i, z) in ["Z_zero", "Z_soft", "Z_stiff"].iter().enumerate() {
        if let Some(Summary {
            metrics: Some(Metrics::Correlation { correlations }),
            ..
        }) = find(runs, ScenarioKind::CoupledWalk, z, COUPLED_SPEED)
        {
            hip.push((correlations[0].mean, correlations[0].std));
            let cells: Vec<String> = (0..3)
                .map(|k| format!("{:.2}+/-{:.3} (reference {})", correlations[k].mean, correlations[k].std, REFERENCE[k][i]))
                .collect();
            lines.push(format!("{z} ({} pairs): hip {}, knee {}, ankle {}", correlations[0].pairs, cells[0], cells[1], cells[2]));
        }
    }
    let c = if hip.len() == 3 {
        let zero_ok = hip[0].0.abs() <= 0.15;
        let ordered = hip[2].0 > hip[1].0 && hip[1].0 > hip[0].0;
        let spread = hip[0].1 > hip[1].1 && hip[1].1 > hip[2].1;
        criterion(
            12,
            "correlation ordering",
            zero_ok && ordered && spread,
            format!(
                "hip rho zero {:.2}+/-{:.3}, soft {:.2}+/-{:.3}, stiff {:.2}+/-{:.3}",
                hip[0].0, hip[0].1, hip[1].0, hip[1].1, hip[2].0, hip[2].1
            ),
        )
    } else {
        missing(12, "correlation ordering", "coupled runs")
    };
    (lines, vec![c])
}

fn fig6(runs: &[Summary]) -> (Vec<String>, Vec<CriterionResult>) {
    match runs.iter().find(|s| s.kind == ScenarioKind::AsymmetricWalk) {
        Some(Summary {
            metrics: Some(Metrics::Asymmetry { teacher_deg, student_deg }),
            ..
        }) => {
            let line = format!(
                "L-R peak flexion: teacher {:.1}/{:.1}/{:.1} deg (reference 40/16/23), student {:.1}/{:.1}/{:.1} deg (reference 35/11/14)",
                teacher_deg[0], teacher_deg[1], teacher_deg[2], student_deg[0], student_deg[1], student_deg[2]
            );
            let ratio = student_deg[0] / TEACHER_ASYMMETRY_DEG[0];
            let c = criterion(
                13,
                "asymmetric-gait transfer",
                ratio >= 0.7,
                format!("student hip asymmetry {:.0}% of the commanded {} deg", 100.0 * ratio, TEACHER_ASYMMETRY_DEG[0]),
            );
            (vec![line], vec![c])
        }
        _ => (Vec::new(), vec![missing(13, "asymmetric-gait transfer", "asymmetric run")]),
    }
}

fn fig7(runs: &[Summary]) -> (Vec<String>, Vec<CriterionResult>) {
    match runs.iter().find(|s| s.kind == ScenarioKind::ObstacleWalk) {
        Some(Summary {
            metrics: Some(Metrics::Obstacle { responses }),
            ..
        }) => {
            let lines: Vec<String> = responses
                .iter()
                .map(|r| {
                    format!(
                        "{} stride at {:.2} s: teacher +{:.1} cm, student +{:.1} cm, transfer {:.0}%",
                        r.teacher.leg.name(),
                        r.teacher.start,
                        100.0 * r.teacher.elevation,
                        100.0 * r.student.as_ref().map_or(0.0, |s| s.elevation),
                        100.0 * r.transfer()
                    )
                })
                .chain(std::iter::once("reference: teacher 21/20 cm, student 17/20 cm".to_string()))
                .collect();
            let transfers: Vec<f64> = responses.iter().map(|r| r.transfer()).collect();
            let c = criterion(
                14,
                "obstacle propagation",
                transfers.len() == OBSTACLES.len() && transfers.iter().all(|t| *t >= 0.5),
                format!("{} raised teacher strides for {} obstacles, transfers {transfers:.2?}", transfers.len(), OBSTACLES.len()),
            );
            (lines, vec![c])
        }
        _ => (Vec::new(), vec![missing(14, "obstacle propagation", "obstacle run")]),
    }
}

pub fn evaluate(figure: Figure, seed: u64, runs: Vec<Summary>) -> FigureReport {
    let (comparison, mut criteria) = match figure {
        Figure::Fig4 => fig4(&runs),
        Figure::Fig5 => fig5(&runs),
        Figure::Fig6 => fig6(&runs),
        Figure::Fig7 => fig7(&runs),
        Figure::Table2 => table2(&runs),
    };
    criteria.push(safety_criterion(&runs));
    FigureReport {
        figure,
        seed,
        runs,
        comparison,
        criteria,
    }
}

/// Runs a figure's battery and compares it with the reference values.
pub fn reproduce(figure: Figure, seed: u64) -> Result<(FigureReport, Vec<Run>)> {
    let runs = run_all(&battery(figure, seed))?;
    let report = evaluate(figure, seed, runs.iter().map(|r| r.summary.clone()).collect());
    Ok((report, runs))
}
