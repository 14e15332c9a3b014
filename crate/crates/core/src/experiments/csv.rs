use std::fs::File;
use std::io::Write;
use std::path::Path;

use super::config::ExperimentKind;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    Ok,
    /// The parameter point is outside the feasible region.
    Skipped,
    /// The point is feasible but the pipeline reported an error.
    Failed,
}

impl RowStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::Skipped => "skipped",
            RowStatus::Failed => "failed",
        }
    }
}

/// One operating point of an MSE experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: ExperimentKind,
    pub of: f64,
    pub b: u32,
    pub delta_sl: f64,
    pub k_sl: Option<usize>,
    pub lambda_prime: Option<f64>,
    pub mse_simulated_db: Option<f64>,
    pub mse_theory_db: Option<f64>,
    pub mse_conventional_db: Option<f64>,
    pub mse_conventional_theory_db: Option<f64>,
    pub mse_hod_db: Option<f64>,
    /// Samples whose recovered residue jump was wrong.
    pub residue_errors: Option<usize>,
    pub samples_used: Option<usize>,
    pub wall_time_ms: Option<f64>,
    pub seed: u64,
    pub status: RowStatus,
    pub reason: String,
}

impl ResultRow {
    pub fn new(experiment: ExperimentKind, of: f64, b: u32, delta_sl: f64, seed: u64) -> Self {
        Self {
            experiment,
            of,
            b,
            delta_sl,
            k_sl: None,
            lambda_prime: None,
            mse_simulated_db: None,
            mse_theory_db: None,
            mse_conventional_db: None,
            mse_conventional_theory_db: None,
            mse_hod_db: None,
            residue_errors: None,
            samples_used: None,
            wall_time_ms: None,
            seed,
            status: RowStatus::Ok,
            reason: String::new(),
        }
    }

    pub const HEADER: [&'static str; 17] = [
        "experiment",
        "of",
        "b",
        "delta_sl",
        "k_sl",
        "lambda_prime",
        "mse_simulated_db",
        "mse_theory_db",
        "mse_conventional_db",
        "mse_conventional_theory_db",
        "mse_hod_db",
        "residue_errors",
        "samples_used",
        "wall_time_ms",
        "seed",
        "status",
        "reason",
    ];

    fn record(&self) -> Vec<String> {
        vec![
            self.experiment.to_string(),
            num(self.of),
            self.b.to_string(),
            num(self.delta_sl),
            opt_int(self.k_sl),
            opt(self.lambda_prime),
            opt(self.mse_simulated_db),
            opt(self.mse_theory_db),
            opt(self.mse_conventional_db),
            opt(self.mse_conventional_theory_db),
            opt(self.mse_hod_db),
            opt_int(self.residue_errors),
            opt_int(self.samples_used),
            opt(self.wall_time_ms),
            self.seed.to_string(),
            self.status.as_str().to_string(),
            self.reason.clone(),
        ]
    }
}

/// One cell of the `M̃` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MGridRow {
    pub n: usize,
    pub of: f64,
    pub s_size: usize,
    pub delta_sl: f64,
    pub trials: usize,
    pub m_tilde: Option<f64>,
    /// `log₂(1 + 0.75·M̃)`.
    pub b_extra: Option<f64>,
    pub wall_time_ms: Option<f64>,
    pub seed: u64,
    pub status: RowStatus,
    pub reason: String,
}

impl MGridRow {
    pub const HEADER: [&'static str; 11] = [
        "n",
        "of",
        "s_size",
        "delta_sl",
        "trials",
        "m_tilde",
        "b_extra",
        "wall_time_ms",
        "seed",
        "status",
        "reason",
    ];

    fn record(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            num(self.of),
            self.s_size.to_string(),
            num(self.delta_sl),
            self.trials.to_string(),
            opt(self.m_tilde),
            opt(self.b_extra),
            opt(self.wall_time_ms),
            self.seed.to_string(),
            self.status.as_str().to_string(),
            self.reason.clone(),
        ]
    }
}

/// 17 significant digits: enough to round-trip any `f64`.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn opt_int(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_records<W: Write>(out: W, header: &[&str], records: impl Iterator<Item = Vec<String>>) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in records {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

fn to_file(path: &Path, header: &[&str], records: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io)?;
    write_records(file, header, records).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(source) => io(source),
        other => Error::Io {
            path: path.to_path_buf(),
            source: std::io::Error::other(format!("{other:?}")),
        },
    })
}

pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    to_file(path, &ResultRow::HEADER, rows.iter().map(ResultRow::record))
}

pub fn emit_m_grid_csv(rows: &[MGridRow], path: &Path) -> Result<()> {
    to_file(path, &MGridRow::HEADER, rows.iter().map(MGridRow::record))
}

/// Write rows to any sink, e.g. standard output.
pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    Ok(write_records(
        out,
        &ResultRow::HEADER,
        rows.iter().map(ResultRow::record),
    )?)
}

pub fn write_m_grid_csv<W: Write>(rows: &[MGridRow], out: W) -> Result<()> {
    Ok(write_records(
        out,
        &MGridRow::HEADER,
        rows.iter().map(MGridRow::record),
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_only_when_empty() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.csv");
        emit_csv(&[], &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text, ResultRow::HEADER.join(",") + "\n");
    }

    #[test]
    fn row_round_trips() {
        let mut r = ResultRow::new(ExperimentKind::MseSweep, 40.0, 4, std::f64::consts::PI / 16.0, 99);
        r.k_sl = Some(8);
        r.lambda_prime = Some(1.0 / 33.0);
        r.mse_simulated_db = Some(-51.234_567_890_123_45);
        r.reason = "a, \"quoted\" reason".into();
        let mut buf = Vec::new();
        write_csv(std::slice::from_ref(&r), &mut buf).unwrap();
        let mut rd = csv::Reader::from_reader(buf.as_slice());
        let rec = rd.records().next().unwrap().unwrap();
        assert_eq!(rec.get(1).unwrap().parse::<f64>().unwrap(), 40.0);
        assert_eq!(rec.get(3).unwrap().parse::<f64>().unwrap(), r.delta_sl);
        assert_eq!(rec.get(5).unwrap().parse::<f64>().unwrap(), 1.0 / 33.0);
        assert_eq!(rec.get(6).unwrap().parse::<f64>().unwrap(), r.mse_simulated_db.unwrap());
        assert_eq!(rec.get(7).unwrap(), "");
        assert_eq!(rec.get(16).unwrap(), r.reason);
    }

    #[test]
    fn io_error_names_path() {
        let e = emit_csv(&[], Path::new("/nonexistent-dir/x.csv")).unwrap_err();
        assert!(e.to_string().contains("/nonexistent-dir/x.csv"));
    }
}
