//! File formats: JSON snapshots and reports, CSV tables.

use std::io::Write;

use serde::Serialize;

use crate::bicoupling::BiTrajectory;
use crate::error::Result;
use crate::limitlaw::LimitSample;
use crate::model::{DegreeVector, GrowthState, StepRecord};
use crate::SCHEMA;

#[derive(Serialize)]
struct CountRow<'a> {
    vector: &'a DegreeVector,
    count: u64,
}

#[derive(Serialize)]
struct Snapshot<'a> {
    schema: &'static str,
    n: u64,
    k: usize,
    delta: f64,
    counts: Vec<CountRow<'a>>,
}

/// `{schema, n, k, delta, counts: [{vector, count}]}` for the current state.
pub fn snapshot_json(state: &GrowthState) -> serde_json::Value {
    let counts = state.degree_counts();
    let snap = Snapshot {
        schema: SCHEMA,
        n: state.step_count(),
        k: state.params().k(),
        delta: state.params().delta(),
        counts: counts.iter().map(|(vector, &count)| CountRow { vector, count }).collect(),
    };
    serde_json::to_value(&snap).expect("snapshot serialises")
}

pub fn write_snapshot<W: Write>(state: &GrowthState, w: W) -> Result<()> {
    serde_json::to_writer_pretty(w, &snapshot_json(state))?;
    Ok(())
}

/// Streaming CSV with columns `step,chosen_label,new_labels`; new labels are
/// joined with `;`.
pub struct TrajectoryWriter<W: Write> {
    out: csv::Writer<W>,
}

impl<W: Write> TrajectoryWriter<W> {
    pub fn new(w: W) -> Result<Self> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["step", "chosen_label", "new_labels"])?;
        Ok(Self { out })
    }

    pub fn write(&mut self, rec: &StepRecord) -> Result<()> {
        let labels: Vec<String> = rec.new_labels.clone().map(|l| l.to_string()).collect();
        self.out.write_record([rec.step.to_string(), rec.chosen.to_string(), labels.join(";")])?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

/// CSV with columns `z,d_0,...,d_k`.
pub fn write_limit_samples<W: Write>(k: usize, samples: &[LimitSample], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["z".to_string()];
    header.extend((0..=k).map(|i| format!("d_{i}")));
    out.write_record(&header)?;
    for s in samples {
        let mut row = vec![format!("{:e}", s.z)];
        row.extend(s.d.iter().map(u64::to_string));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// One row of the tail-box results table.
#[derive(Clone, Debug, Serialize)]
pub struct TailRow {
    pub x: Vec<f64>,
    pub h: f64,
    pub empirical: f64,
    pub quadrature: f64,
    pub se: f64,
}

/// CSV with columns `x_0,...,x_k,h,empirical,quadrature,se`.
pub fn write_tail_table<W: Write>(k: usize, rows: &[TailRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<String> = (0..=k).map(|i| format!("x_{i}")).collect();
    header.extend(["h", "empirical", "quadrature", "se"].map(String::from));
    out.write_record(&header)?;
    for r in rows {
        let mut row: Vec<String> = r.x.iter().map(f64::to_string).collect();
        row.extend([r.h, r.empirical, r.quadrature, r.se].map(|v| v.to_string()));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// CSV with columns `event_index,T_n,chosen_label`; event 0 has no label.
pub fn write_bi_trajectory<W: Write>(traj: &BiTrajectory, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["event_index", "T_n", "chosen_label"])?;
    for (n, t) in traj.jump_times().iter().enumerate() {
        let label = if n == 0 { String::new() } else { traj.chosen_labels()[n - 1].to_string() };
        out.write_record([n.to_string(), format!("{t:e}"), label])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ModelParams;
    use crate::rng::stream_rng;

    #[test]
    fn snapshot_shape() {
        let s = GrowthState::new(ModelParams::new(1, 0.0).unwrap());
        let v = snapshot_json(&s);
        assert_eq!(v["schema"], SCHEMA);
        assert_eq!(v["n"], 0);
        assert_eq!(v["counts"][0]["vector"], serde_json::json!([2, 1]));
        assert_eq!(v["counts"][0]["count"], 3);
    }

    #[test]
    fn trajectory_rows() {
        let mut s = GrowthState::new(ModelParams::new(2, 0.0).unwrap());
        let mut buf = Vec::new();
        let mut w = TrajectoryWriter::new(&mut buf).unwrap();
        s.run_with(2, &mut stream_rng(1, 0), |_, r| w.write(r).unwrap());
        w.finish().unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "step,chosen_label,new_labels");
        assert!(lines[1].ends_with(",5;6;7"));
        assert!(lines[2].ends_with(",8;9;10"));
    }
}
