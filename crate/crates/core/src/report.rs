//! CSV rows for benchmark results.

use std::io::Write;

use serde::Serialize;

use crate::solve::{SolveOutcome, SolveStatus};

pub const COLUMNS: [&str; 14] = [
    "map",
    "scen",
    "k",
    "algo",
    "preset",
    "status",
    "xi",
    "runtime_s",
    "sat_consultations",
    "consistency_checks",
    "conflicts_refined",
    "decisions",
    "propagations",
    "clauses_final",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRecord {
    pub map: String,
    pub scen: String,
    pub k: usize,
    pub algo: String,
    pub preset: String,
    pub status: String,
    /// Empty unless solved.
    pub xi: Option<u64>,
    pub runtime_s: f64,
    pub sat_consultations: u64,
    pub consistency_checks: u64,
    pub conflicts_refined: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub clauses_final: usize,
}

impl ResultRecord {
    pub fn from_outcome(
        map: &str,
        scen: &str,
        k: usize,
        algo: &str,
        preset: &str,
        out: &SolveOutcome,
    ) -> Self {
        let s = &out.stats;
        ResultRecord {
            map: map.to_string(),
            scen: scen.to_string(),
            k,
            algo: algo.to_string(),
            preset: preset.to_string(),
            status: out.status.to_string(),
            xi: if out.status == SolveStatus::Solved {
                out.xi
            } else {
                None
            },
            runtime_s: (s.runtime.as_secs_f64() * 1e6).round() / 1e6,
            sat_consultations: s.sat_consultations,
            consistency_checks: s.consistency_checks,
            conflicts_refined: s.conflicts_refined,
            decisions: s.decisions,
            propagations: s.propagations,
            clauses_final: s.clauses_final,
        }
    }
}

/// Writes the header with the first record.
pub struct ResultWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> ResultWriter<W> {
    pub fn new(out: W) -> Self {
        ResultWriter {
            inner: csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(out),
        }
    }

    pub fn write(&mut self, record: &ResultRecord) -> csv::Result<()> {
        self.inner.serialize(record)?;
        self.inner.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> W {
        self.inner
            .into_inner()
            .unwrap_or_else(|e| panic!("flushing CSV output: {}", e.error()))
    }
}

/// One CSV line for `record`, without header.
pub fn emit_result_row(record: &ResultRecord) -> String {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.serialize(record).expect("in-memory CSV write");
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(status: &str, xi: Option<u64>) -> ResultRecord {
        ResultRecord {
            map: "empty-16-16.map".into(),
            scen: "s.scen".into(),
            k: 2,
            algo: "mddsat".into(),
            preset: String::new(),
            status: status.into(),
            xi,
            runtime_s: 0.25,
            sat_consultations: 1,
            consistency_checks: 0,
            conflicts_refined: 0,
            decisions: 10,
            propagations: 100,
            clauses_final: 50,
        }
    }

    #[test]
    fn solved_and_timeout_rows() {
        assert_eq!(
            emit_result_row(&record("SOLVED", Some(13))),
            "empty-16-16.map,s.scen,2,mddsat,,SOLVED,13,0.25,1,0,0,10,100,50\n"
        );
        assert_eq!(
            emit_result_row(&record("TIMEOUT", None)),
            "empty-16-16.map,s.scen,2,mddsat,,TIMEOUT,,0.25,1,0,0,10,100,50\n"
        );
    }

    #[test]
    fn commas_are_quoted() {
        let mut r = record("SOLVED", Some(1));
        r.preset = "1/2,3/4".into();
        assert!(emit_result_row(&r).contains(",\"1/2,3/4\","));
    }

    #[test]
    fn header_once() {
        let mut w = ResultWriter::new(Vec::new());
        w.write(&record("SOLVED", Some(1))).unwrap();
        w.write(&record("SOLVED", Some(2))).unwrap();
        let text = String::from_utf8(w.into_inner()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], COLUMNS.join(","));
    }
}
