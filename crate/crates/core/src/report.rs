//! CSV export of iteration traces and restart stage tables.
//!
//! Floats are written with the shortest representation that parses back to
//! the same bits, so multipliers recomputed from a trace file match the
//! in-memory ones exactly.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::duality::{multipliers_from_steps, DualMultipliers};
use crate::error::Result;
use crate::md::{IterationRecord, StepClass};
use crate::restart::RestartReport;

pub const TRACE_HEADER: [&str; 7] = [
    "i",
    "step_class",
    "g_value",
    "m_i",
    "h_i",
    "active_index",
    "cum_inv_m_sq",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub i: usize,
    pub step_class: StepClass,
    pub g_value: f64,
    pub m_i: f64,
    pub h_i: f64,
    pub active_index: Option<usize>,
    pub cum_inv_m_sq: f64,
}

impl From<&IterationRecord> for TraceRow {
    fn from(r: &IterationRecord) -> Self {
        Self {
            i: r.index,
            step_class: r.step_class,
            g_value: r.g_value,
            m_i: r.m_i,
            h_i: r.h_i,
            active_index: r.active_index,
            cum_inv_m_sq: r.cum_inv_m_sq,
        }
    }
}

pub fn write_trace_csv<'a, W, I>(out: W, trace: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a IterationRecord>,
{
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for r in trace {
        w.write_record(&[
            r.index.to_string(),
            r.step_class.as_str().to_string(),
            r.g_value.to_string(),
            r.m_i.to_string(),
            r.h_i.to_string(),
            r.active_index.map(|m| m.to_string()).unwrap_or_default(),
            r.cum_inv_m_sq.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace_csv<R: Read>(input: R) -> Result<Vec<TraceRow>> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers()?.clone();
    if header.iter().ne(TRACE_HEADER.iter().copied()) {
        return Err(crate::Error::TraceCorrupted(format!(
            "unexpected trace header: {}",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for rec in rd.deserialize() {
        rows.push(rec?);
    }
    Ok(rows)
}

pub fn multipliers_from_rows(rows: &[TraceRow], num_parts: usize) -> Result<DualMultipliers> {
    multipliers_from_steps(
        rows.iter().map(|r| (r.step_class, r.h_i, r.active_index)),
        num_parts,
    )
}

/// One line of the restart stage table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRow {
    pub k: usize,
    pub r_sq: f64,
    pub eps_k: f64,
    pub theta_sq: f64,
    pub n_calls: usize,
    pub effective_m: f64,
}

pub fn stage_rows(report: &RestartReport) -> Vec<StageRow> {
    report
        .stages
        .iter()
        .map(|s| StageRow {
            k: s.spec.k,
            r_sq: s.spec.r_sq,
            eps_k: s.spec.eps,
            theta_sq: s.theta_sq,
            n_calls: s.result.n_calls,
            effective_m: s.result.effective_m,
        })
        .collect()
}

pub fn write_stages_csv<W: Write>(out: W, rows: &[StageRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;

    fn rec(i: usize, class: StepClass, h: f64, active: Option<usize>) -> IterationRecord {
        IterationRecord {
            index: i,
            point: Point::zeros(1),
            step_class: class,
            m_i: 1.0 / 3.0,
            h_i: h,
            g_value: -0.1 * i as f64,
            phi_value: 0.0,
            active_index: active,
            cum_inv_m_sq: 9.0 * (i + 1) as f64,
        }
    }

    #[test]
    fn trace_round_trip_is_exact() {
        let trace = vec![
            rec(0, StepClass::NonProductive, 0.1 / 7.0, Some(1)),
            rec(1, StepClass::Productive, std::f64::consts::PI / 1e5, None),
            rec(2, StepClass::NonProductive, 1e-17 / 3.0, Some(0)),
        ];
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &trace).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("i,step_class,g_value,m_i,h_i,active_index,cum_inv_m_sq\n"));
        assert!(text.contains(",productive,"));
        let rows = read_trace_csv(buf.as_slice()).unwrap();
        assert_eq!(rows.len(), 3);
        for (row, r) in rows.iter().zip(&trace) {
            assert_eq!(row, &TraceRow::from(r));
        }
        let a = multipliers_from_rows(&rows, 2).unwrap();
        let b = crate::duality::multipliers_from_trace(&trace, 2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_wrong_header() {
        let err = read_trace_csv("a,b\n1,2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, crate::Error::TraceCorrupted(_)));
    }
}
