use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::joint::{Joint, JointVector, NUM_JOINTS};

/// Sampled joint-angle trajectory. Playback loops it end to start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaitTrajectory {
    pub times: Vec<f64>,
    pub angles: Vec<JointVector>,
}

impl GaitTrajectory {
    pub fn new(times: Vec<f64>, angles: Vec<JointVector>) -> Result<Self> {
        if times.len() != angles.len() {
            return Err(Error::param("trajectory", "times and angles lengths differ"));
        }
        if times.len() < 2 {
            return Err(Error::InsufficientData("trajectory needs at least 2 samples".into()));
        }
        if !times.windows(2).all(|w| w[1] > w[0]) || !times.iter().all(|t| t.is_finite()) {
            return Err(Error::param("trajectory.times", "must be finite and strictly increasing"));
        }
        if !angles.iter().all(JointVector::is_finite) {
            return Err(Error::NonFinite("trajectory angles".into()));
        }
        Ok(GaitTrajectory { times, angles })
    }

    /// One cycle of `samples` evenly spaced over `[0, period]`; the last sample
    /// should repeat the first.
    pub fn periodic(samples: Vec<JointVector>, period: f64) -> Result<Self> {
        let n = samples.len();
        if n < 2 {
            return Err(Error::InsufficientData("cycle needs at least 2 samples".into()));
        }
        let times = (0..n).map(|k| period * k as f64 / (n - 1) as f64).collect();
        GaitTrajectory::new(times, samples)
    }

    pub fn duration(&self) -> f64 {
        self.times[self.times.len() - 1] - self.times[0]
    }

    /// Linear interpolation at `t`, wrapping cyclically outside the recording.
    pub fn sample(&self, t: f64) -> JointVector {
        let t0 = self.times[0];
        let local = t0 + (t - t0).rem_euclid(self.duration());
        let i = self.times.partition_point(|&v| v <= local).clamp(1, self.times.len() - 1);
        let (ta, tb) = (self.times[i - 1], self.times[i]);
        let w = ((local - ta) / (tb - ta)).clamp(0.0, 1.0);
        let (a, b) = (self.angles[i - 1], self.angles[i]);
        a + (b - a) * w
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["time".to_string()];
        header.extend(Joint::ALL.iter().map(|j| j.name()));
        out.write_record(&header)?;
        for (t, q) in self.times.iter().zip(&self.angles) {
            let mut row = vec![t.to_string()];
            row.extend(q.iter().map(|v| v.to_string()));
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let mut times = Vec::new();
        let mut angles = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != NUM_JOINTS + 1 {
                return Err(Error::param("trajectory csv", format!("row {} has {} fields", line + 1, rec.len())));
            }
            let parse = |k: usize| -> Result<f64> {
                rec[k]
                    .trim()
                    .parse()
                    .map_err(|_| Error::param("trajectory csv", format!("row {}: bad number `{}`", line + 1, &rec[k])))
            };
            times.push(parse(0)?);
            let mut q = JointVector::ZERO;
            for i in 0..NUM_JOINTS {
                q[i] = parse(i + 1)?;
            }
            angles.push(q);
        }
        GaitTrajectory::new(times, angles)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_and_wraps() {
        let tr = GaitTrajectory::new(
            vec![0.0, 1.0, 2.0],
            vec![JointVector::splat(0.0), JointVector::splat(1.0), JointVector::splat(0.0)],
        )
        .unwrap();
        assert_eq!(tr.sample(0.5)[0], 0.5);
        assert_eq!(tr.sample(1.0)[3], 1.0);
        assert_eq!(tr.sample(2.5)[2], 0.5);
        assert_eq!(tr.sample(-0.5)[1], 0.5);
    }

    #[test]
    fn csv_round_trip() {
        let tr = GaitTrajectory::periodic(
            (0..11).map(|k| JointVector::from_fn(|i| (k * i) as f64 * 0.0137)).collect(),
            1.3,
        )
        .unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let back = GaitTrajectory::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, tr);
    }
}
