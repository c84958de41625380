use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::joint::{Joint, JointVector, NUM_JOINTS};
use crate::sim::spec::ScenarioKind;

/// Control and log period, s.
pub const TICK: f64 = 0.01;
/// Magic of the binary sidecar.
pub const BINARY_MAGIC: [u8; 4] = *b"GLOG";

/// One 100 Hz log row; every value refers to the start of the control tick.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LogRow {
    pub time: f64,
    pub warmup: bool,
    /// Selector mode code (0 transparent, 1 live, 2 playback).
    pub mode: u8,
    /// The selected source was unavailable or stale.
    pub fallback: bool,
    /// Stance code (0 flight, 1 left, 2 right, 3 double).
    pub stance: u8,
    /// Left share of the weight.
    pub alpha: f64,
    pub contact: [bool; 2],
    pub teacher_contact: [bool; 2],
    pub theta_des: JointVector,
    pub theta_act: JointVector,
    pub theta_e: JointVector,
    pub omega: JointVector,
    /// Desired interaction torque before the rate limiter, Nm.
    pub tau_pre: JointVector,
    /// Desired interaction torque after the rate limiter, Nm.
    pub tau_des: JointVector,
    /// Measured interaction torque, Nm.
    pub tau_int: JointVector,
    pub duty: JointVector,
    /// Student toe height above the supporting foot, m.
    pub clearance: [f64; 2],
    /// Same for the desired trajectory with the teacher's contacts, m.
    pub teacher_clearance: [f64; 2],
}

const JOINT_GROUPS: [&str; 8] = ["theta_des", "theta_act", "theta_e", "omega", "tau_pre", "tau_des", "tau_int", "duty"];
const LEADING: [&str; 10] = [
    "time",
    "warmup",
    "mode",
    "fallback",
    "stance",
    "alpha",
    "contact_l",
    "contact_r",
    "teacher_contact_l",
    "teacher_contact_r",
];
const TRAILING: [&str; 4] = ["clearance_l", "clearance_r", "teacher_clearance_l", "teacher_clearance_r"];
pub const NUM_COLUMNS: usize = LEADING.len() + JOINT_GROUPS.len() * NUM_JOINTS + TRAILING.len();

/// Fixed CSV header.
pub fn header() -> Vec<String> {
    let mut h: Vec<String> = LEADING.iter().map(|s| s.to_string()).collect();
    for g in JOINT_GROUPS {
        h.extend(Joint::ALL.iter().map(|j| format!("{g}_{}", j.name())));
    }
    h.extend(TRAILING.iter().map(|s| s.to_string()));
    h
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

impl LogRow {
    fn groups(&self) -> [&JointVector; 8] {
        [
            &self.theta_des,
            &self.theta_act,
            &self.theta_e,
            &self.omega,
            &self.tau_pre,
            &self.tau_des,
            &self.tau_int,
            &self.duty,
        ]
    }

    pub fn values(&self) -> Vec<f64> {
        let mut v = vec![
            self.time,
            flag(self.warmup),
            self.mode as f64,
            flag(self.fallback),
            self.stance as f64,
            self.alpha,
            flag(self.contact[0]),
            flag(self.contact[1]),
            flag(self.teacher_contact[0]),
            flag(self.teacher_contact[1]),
        ];
        for g in self.groups() {
            v.extend(g.iter());
        }
        v.extend(self.clearance);
        v.extend(self.teacher_clearance);
        v
    }

    pub fn from_values(v: &[f64]) -> Result<LogRow> {
        if v.len() != NUM_COLUMNS {
            return Err(Error::param("log row", format!("expected {NUM_COLUMNS} values, got {}", v.len())));
        }
        let jv = |g: usize| {
            let base = LEADING.len() + g * NUM_JOINTS;
            JointVector::from_fn(|i| v[base + i])
        };
        let t = LEADING.len() + JOINT_GROUPS.len() * NUM_JOINTS;
        Ok(LogRow {
            time: v[0],
            warmup: v[1] != 0.0,
            mode: v[2] as u8,
            fallback: v[3] != 0.0,
            stance: v[4] as u8,
            alpha: v[5],
            contact: [v[6] != 0.0, v[7] != 0.0],
            teacher_contact: [v[8] != 0.0, v[9] != 0.0],
            theta_des: jv(0),
            theta_act: jv(1),
            theta_e: jv(2),
            omega: jv(3),
            tau_pre: jv(4),
            tau_des: jv(5),
            tau_int: jv(6),
            duty: jv(7),
            clearance: [v[t], v[t + 1]],
            teacher_clearance: [v[t + 2], v[t + 3]],
        })
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|x| x.is_finite())
    }
}

/// Where and why a run stopped early.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fault {
    pub tick: u64,
    pub time: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimLog {
    pub id: String,
    pub kind: ScenarioKind,
    pub speed: f64,
    pub body_mass: f64,
    /// Rows before this time are flagged as warm-up, s.
    pub warmup: f64,
    pub rows: Vec<LogRow>,
    pub fault: Option<Fault>,
    pub frames_sent: u64,
    pub plant_substeps: u64,
}

impl SimLog {
    /// Rows after the warm-up interval.
    pub fn analysis_rows(&self) -> &[LogRow] {
        let start = self.rows.partition_point(|r| r.warmup);
        &self.rows[start..]
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(header())?;
        for r in &self.rows {
            out.write_record(r.values().iter().map(|v| v.to_string()))?;
        }
        out.flush()?;
        Ok(())
    }

    /// Rows only; metadata comes back as defaults.
    pub fn read_csv<R: Read>(r: R) -> Result<Vec<LogRow>> {
        let mut rdr = csv::Reader::from_reader(r);
        let expected = header();
        let got: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if got != expected {
            return Err(Error::param("log csv", "header does not match the log layout"));
        }
        let mut rows = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let v = rec
                .iter()
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::param("log csv", format!("row {}: bad number", line + 1)))?;
            rows.push(LogRow::from_values(&v)?);
        }
        Ok(rows)
    }

    /// Little-endian sidecar: magic, column count (u32), row count (u64), then
    /// row-major f64 values in header order.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&BINARY_MAGIC)?;
        w.write_all(&(NUM_COLUMNS as u32).to_le_bytes())?;
        w.write_all(&(self.rows.len() as u64).to_le_bytes())?;
        for r in &self.rows {
            for v in r.values() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Vec<LogRow>> {
        let mut head = [0u8; 16];
        r.read_exact(&mut head)?;
        if head[..4] != BINARY_MAGIC {
            return Err(Error::param("log binary", "bad magic"));
        }
        let cols = u32::from_le_bytes(head[4..8].try_into().expect("4 bytes")) as usize;
        let n = u64::from_le_bytes(head[8..16].try_into().expect("8 bytes"));
        if cols != NUM_COLUMNS {
            return Err(Error::param("log binary", format!("expected {NUM_COLUMNS} columns, got {cols}")));
        }
        let mut buf = vec![0u8; 8 * cols];
        let mut rows = Vec::new();
        for _ in 0..n {
            r.read_exact(&mut buf)?;
            let v: Vec<f64> = buf
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                .collect();
            rows.push(LogRow::from_values(&v)?);
        }
        Ok(rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(t: f64) -> LogRow {
        LogRow {
            time: t,
            mode: 1,
            stance: 3,
            alpha: 0.25,
            contact: [true, false],
            theta_des: JointVector::from_fn(|i| 0.1 * i as f64 + t),
            tau_pre: JointVector::splat(-1.0 / 3.0),
            clearance: [0.0, 0.125],
            ..LogRow::default()
        }
    }

    #[test]
    fn header_matches_row_width() {
        assert_eq!(header().len(), NUM_COLUMNS);
        assert_eq!(row(0.0).values().len(), NUM_COLUMNS);
        assert_eq!(header()[10], "theta_des_l_hip");
    }

    #[test]
    fn csv_and_binary_round_trip() {
        let log = SimLog {
            id: "x".into(),
            kind: ScenarioKind::CoupledWalk,
            speed: 1.0,
            body_mass: 75.0,
            warmup: 0.0,
            rows: vec![row(0.0), row(0.01)],
            fault: None,
            frames_sent: 4,
            plant_substeps: 20,
        };
        let mut csv = Vec::new();
        log.write_csv(&mut csv).unwrap();
        assert_eq!(SimLog::read_csv(csv.as_slice()).unwrap(), log.rows);
        let mut bin = Vec::new();
        log.write_binary(&mut bin).unwrap();
        assert_eq!(bin.len(), 16 + 2 * 8 * NUM_COLUMNS);
        assert_eq!(SimLog::read_binary(bin.as_slice()).unwrap(), log.rows);
    }
}
