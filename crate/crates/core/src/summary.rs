//! Per-run metrics and the on-disk artifacts of a scenario.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use serde::Serialize;

use crate::analysis::{
    effective_stiffness_report, foot_clearance, has_source, interaction_segments, max_torque_slope, obstacle_responses,
    pair_steps, peak_asymmetry_deg, step_correlations, transparency_stats, CorrelationStats, MeanStd, ObstacleResponse,
    StiffnessReport, Walker,
};
use crate::config::to_json;
use crate::error::Result;
use crate::joint::{Joint, JointKind, Leg};
use crate::sim::{Fault, ScenarioKind, ScenarioSpec, SimLog};

/// Kind-specific metrics.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Metrics {
    Transparency {
        /// |interaction torque| / body mass per joint kind, Nm/kg.
        interaction: [MeanStd; 3],
        /// Largest joint speed, rad/s.
        max_speed: f64,
    },
    Stiffness {
        report: StiffnessReport,
        /// Mean |tracking error| per joint kind, deg.
        mean_abs_error_deg: [f64; 3],
    },
    Correlation {
        correlations: [CorrelationStats; 3],
    },
    Asymmetry {
        teacher_deg: [f64; 3],
        student_deg: [f64; 3],
    },
    Obstacle {
        responses: Vec<ObstacleResponse>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub id: String,
    pub kind: ScenarioKind,
    pub speed: f64,
    pub impedance: String,
    pub seed: u64,
    pub rows: usize,
    pub fault: Option<Fault>,
    /// Largest per-sample slope of the rate-limited torque, Nm/s.
    pub max_torque_slope: f64,
    /// Every commanded angle (rows with a source) lies within the range of motion.
    pub rom_respected: bool,
    /// Absent when the run faulted before enough data was logged.
    pub metrics: Option<Metrics>,
    /// Why the metrics are absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics_error: Option<String>,
}

fn mean_abs_error_deg(log: &SimLog) -> [f64; 3] {
    let rows = log.analysis_rows();
    JointKind::ALL.map(|kind| {
        let total: f64 = rows
            .iter()
            .flat_map(|r| Leg::BOTH.map(|leg| r.theta_e[Joint::new(leg, kind)].abs()))
            .sum();
        (total / (2 * rows.len()).max(1) as f64).to_degrees()
    })
}

fn metrics(spec: &ScenarioSpec, log: &SimLog) -> Result<Metrics> {
    let rows = log.analysis_rows();
    Ok(match spec.kind {
        ScenarioKind::Transparency => Metrics::Transparency {
            interaction: transparency_stats(&interaction_segments(rows), log.body_mass)?,
            max_speed: rows.iter().map(|r| r.omega.max_abs()).fold(0.0, f64::max),
        },
        ScenarioKind::VirtualTeacherPlayback => Metrics::Stiffness {
            report: effective_stiffness_report(rows, log.body_mass)?,
            mean_abs_error_deg: mean_abs_error_deg(log),
        },
        ScenarioKind::CoupledWalk => Metrics::Correlation {
            correlations: step_correlations(&pair_steps(rows))?,
        },
        ScenarioKind::AsymmetricWalk => Metrics::Asymmetry {
            teacher_deg: peak_asymmetry_deg(rows, Walker::Teacher)?,
            student_deg: peak_asymmetry_deg(rows, Walker::Student)?,
        },
        ScenarioKind::ObstacleWalk => {
            let teacher = foot_clearance(rows, &spec.exo, Walker::Teacher);
            let student = foot_clearance(rows, &spec.exo, Walker::Student);
            Metrics::Obstacle {
                responses: obstacle_responses(&teacher, &student),
            }
        }
    })
}

pub fn summarize(spec: &ScenarioSpec, log: &SimLog) -> Summary {
    let (metrics, metrics_error) = match metrics(spec, log) {
        Ok(m) => (Some(m), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Summary {
        id: spec.id.clone(),
        kind: spec.kind,
        speed: spec.speed,
        impedance: spec.impedance.label(),
        seed: spec.seed,
        rows: log.rows.len(),
        fault: log.fault.clone(),
        max_torque_slope: max_torque_slope(&log.rows),
        rom_respected: log.rows.iter().filter(|r| has_source(r)).all(|r| spec.rom.contains(&r.theta_des)),
        metrics,
        metrics_error,
    }
}

/// Writes `scenario.json`, `log.csv`, `log.bin` and `summary.json` into `dir`.
pub fn write_artifacts(dir: &Path, spec: &ScenarioSpec, log: &SimLog, summary: &Summary) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("scenario.json"), to_json(spec)?)?;
    log.write_csv(BufWriter::new(File::create(dir.join("log.csv"))?))?;
    log.write_binary(BufWriter::new(File::create(dir.join("log.bin"))?))?;
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(summary)?)?;
    Ok(())
}
