//! Trace CSV files.
//!
//! Layout (version 1):
//!
//! ```text
//! # tmap-trace v1
//! k,psi,residual_norm,t_k,mu_k,minus_set_size,cg_iters,active_set_fingerprint,used_safeguard,backtracks
//! 0,...
//! # status: converged
//! # iterations: 12
//! ...
//! ```
//!
//! `t_k` and `mu_k` are empty on rows without a step. Summary lines after the
//! rows are `# key: value` comments and are skipped by the row parser.

use std::io::{Read, Write};

use crate::error::{Result, TmapError};
use crate::solver::IterationRecord;

pub const TRACE_HEADER: &str = "# tmap-trace v1";

/// Key/value lines written after the rows.
pub type TraceSummary = Vec<(String, String)>;

#[derive(Debug, Clone, PartialEq)]
pub struct TraceFile {
    pub records: Vec<IterationRecord>,
    pub summary: TraceSummary,
}

pub fn write_trace<W: Write>(
    w: W,
    records: &[IterationRecord],
    summary: &TraceSummary,
) -> Result<()> {
    let mut w = w;
    writeln!(w, "{TRACE_HEADER}")?;
    let mut csv = csv::Writer::from_writer(w);
    for rec in records {
        csv.serialize(rec)?;
    }
    if records.is_empty() {
        csv.write_record([
            "k",
            "psi",
            "residual_norm",
            "t_k",
            "mu_k",
            "minus_set_size",
            "cg_iters",
            "active_set_fingerprint",
            "used_safeguard",
            "backtracks",
        ])?;
    }
    let mut w = csv
        .into_inner()
        .map_err(|e| TmapError::Io(e.into_error()))?;
    for (key, value) in summary {
        writeln!(w, "# {key}: {value}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace<R: Read>(mut r: R) -> Result<TraceFile> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    if text.lines().next().map(str::trim) != Some(TRACE_HEADER) {
        return Err(TmapError::Parse {
            line: 1,
            message: format!("expected '{TRACE_HEADER}'"),
        });
    }
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let records = reader
        .deserialize()
        .collect::<std::result::Result<Vec<IterationRecord>, _>>()?;
    for (i, rec) in records.iter().enumerate() {
        if rec.k != i {
            return Err(TmapError::Data(format!("row {i} has k = {}", rec.k)));
        }
    }
    let summary = text
        .lines()
        .skip(1)
        .filter_map(|l| l.strip_prefix("# "))
        .filter_map(|l| l.split_once(": "))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
    Ok(TraceFile { records, summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record() -> impl Strategy<Value = IterationRecord> {
        (
            any::<f64>().prop_filter("finite", |v| v.is_finite()),
            0.0..1e3f64,
            prop::option::of(1e-20..=1.0f64),
            prop::option::of(0.0..1.0f64),
            0usize..10_000,
            0usize..100,
            any::<u64>(),
            any::<bool>(),
            0usize..60,
        )
            .prop_map(|(psi, r, t, mu, ms, cg, fp, sg, bt)| IterationRecord {
                k: 0,
                psi,
                residual_norm: r,
                t_k: t,
                mu_k: mu,
                minus_set_size: ms,
                cg_iters: cg,
                active_set_fingerprint: fp,
                used_safeguard: sg,
                backtracks: bt,
            })
    }

    proptest! {
        #[test]
        fn rows_round_trip(mut recs in prop::collection::vec(record(), 0..20)) {
            for (i, r) in recs.iter_mut().enumerate() {
                r.k = i;
            }
            let summary = vec![("status".to_string(), "converged".to_string())];
            let mut buf = Vec::new();
            write_trace(&mut buf, &recs, &summary).unwrap();
            let back = read_trace(buf.as_slice()).unwrap();
            prop_assert_eq!(back.records, recs);
            prop_assert_eq!(back.summary, summary);
        }
    }

    #[test]
    fn rejects_missing_header_and_gaps() {
        assert!(read_trace("k,psi\n".as_bytes()).is_err());
        let rec = IterationRecord {
            k: 3,
            psi: 1.0,
            residual_norm: 0.5,
            t_k: None,
            mu_k: None,
            minus_set_size: 0,
            cg_iters: 0,
            active_set_fingerprint: 1,
            used_safeguard: false,
            backtracks: 0,
        };
        let mut buf = Vec::new();
        write_trace(&mut buf, &[rec], &Vec::new()).unwrap();
        assert!(read_trace(buf.as_slice()).is_err());
    }

    #[test]
    fn nan_residual_survives() {
        let rec = IterationRecord {
            k: 0,
            psi: f64::INFINITY,
            residual_norm: f64::NAN,
            t_k: None,
            mu_k: None,
            minus_set_size: 0,
            cg_iters: 0,
            active_set_fingerprint: 1,
            used_safeguard: false,
            backtracks: 0,
        };
        let mut buf = Vec::new();
        write_trace(&mut buf, &[rec], &Vec::new()).unwrap();
        let back = read_trace(buf.as_slice()).unwrap();
        assert!(back.records[0].residual_norm.is_nan());
        assert_eq!(back.records[0].psi, f64::INFINITY);
    }
}
