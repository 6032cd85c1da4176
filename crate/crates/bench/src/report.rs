//! Aggregation of trial records and CSV input/output.

use std::path::Path;

use altrecon::metrics::ratio_db;
use serde::Serialize;

use crate::sweep::TrialRecord;
use crate::BenchError;

/// Per-(algorithm, grid point) summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub algo: String,
    pub n1: usize,
    pub n2: usize,
    pub r: usize,
    pub m: usize,
    pub xi: f64,
    pub smnr_db: f64,
    pub trials: usize,
    /// `10 log10(sum ||X||^2 / sum ||X - X_hat||^2)`.
    pub srer_db: f64,
    pub median_srer_db: f64,
    pub converged_fraction: f64,
}

pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of an empty set");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// `(signal, error)` energies of a record. Records read back from CSV carry no
/// energies; they count as unit signal with error `10^(-srer/10)`.
fn energies(rec: &TrialRecord) -> (f64, f64) {
    if rec.signal_energy > 0.0 {
        (rec.signal_energy, rec.error_energy)
    } else {
        (1.0, 10f64.powf(-rec.srer_db / 10.0))
    }
}

/// Groups records by (algo, m, xi, smnr) in first-appearance order.
pub fn aggregate(records: &[TrialRecord]) -> Vec<SummaryRow> {
    let mut groups: Vec<(SummaryRow, Vec<&TrialRecord>)> = Vec::new();
    for rec in records {
        let found = groups.iter_mut().find(|(row, _)| {
            row.algo == rec.algo
                && row.m == rec.m
                && row.xi.to_bits() == rec.xi.to_bits()
                && row.smnr_db.to_bits() == rec.smnr_db.to_bits()
        });
        match found {
            Some((_, members)) => members.push(rec),
            None => groups.push((
                SummaryRow {
                    algo: rec.algo.clone(),
                    n1: rec.n1,
                    n2: rec.n2,
                    r: rec.r,
                    m: rec.m,
                    xi: rec.xi,
                    smnr_db: rec.smnr_db,
                    trials: 0,
                    srer_db: 0.0,
                    median_srer_db: 0.0,
                    converged_fraction: 0.0,
                },
                vec![rec],
            )),
        }
    }
    groups
        .into_iter()
        .map(|(mut row, members)| {
            let (signal, error) = members.iter().map(|r| energies(r)).fold((0.0, 0.0), |acc, (s, e)| (acc.0 + s, acc.1 + e));
            let srers: Vec<f64> = members.iter().map(|r| r.srer_db).collect();
            row.trials = members.len();
            row.srer_db = ratio_db(signal, error);
            row.median_srer_db = median(&srers);
            row.converged_fraction = members.iter().filter(|r| r.converged).count() as f64 / members.len() as f64;
            row
        })
        .collect()
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> BenchError {
    BenchError::Io(format!("{}: {e}", path.display()))
}

/// Writes the header and one row per record.
pub fn emit_csv(records: &[TrialRecord], path: &Path) -> Result<(), BenchError> {
    let file = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    write_records(records, file).map_err(|e| io_err(path, e))
}

pub const CSV_HEADER: &str = "algo,n1,n2,r,m,xi,smnr_db,trial,seed,srer_db,iterations,runtime_ms,converged";

pub fn write_records<W: std::io::Write>(records: &[TrialRecord], out: W) -> Result<(), csv::Error> {
    // the header is written by hand so an empty record list still gets one
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for rec in records {
        w.serialize(rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<TrialRecord>, BenchError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    reader
        .deserialize()
        .collect::<Result<Vec<TrialRecord>, _>>()
        .map_err(|e| io_err(path, e))
}

pub fn write_summary<W: std::io::Write>(rows: &[SummaryRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
