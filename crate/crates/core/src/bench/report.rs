use std::io::Write;
use std::path::Path;

use super::{BenchError, RmseReport};

/// RMSE columns written when the report set is empty.
pub const CSV_DEFAULT_STATE_COLUMNS: usize = 4;

fn header(n: usize) -> Vec<String> {
    let mut h: Vec<String> = ["filter", "case", "delta"].map(String::from).to_vec();
    h.extend((1..=n).map(|i| format!("rmse_x{i}")));
    h.extend(["rmse_norm", "failures", "trials", "mean_step_seconds"].map(String::from));
    h
}

fn record(r: &RmseReport, n: usize) -> Vec<String> {
    let num = |v: f64| if r.is_failed() { "NaN".to_string() } else { format!("{v}") };
    let mut row = vec![
        r.filter.name().to_string(),
        r.case.clone(),
        r.delta.map_or_else(|| "-".to_string(), |d| format!("{d}")),
    ];
    row.extend((0..n).map(|i| r.rmse.get(i).map_or_else(String::new, |&v| num(v))));
    row.push(num(r.rmse_norm));
    row.push(r.failures.to_string());
    row.push(r.trials.to_string());
    row.push(r.mean_step_seconds.map_or_else(|| "-".to_string(), |s| format!("{s}")));
    row
}

/// Writes one row per report. Failed cells carry `NaN` in every numeric
/// RMSE column.
pub fn write_csv_to<W: Write>(reports: &[RmseReport], out: W) -> Result<(), BenchError> {
    let n = reports
        .iter()
        .map(|r| r.rmse.len())
        .max()
        .unwrap_or(CSV_DEFAULT_STATE_COLUMNS);
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| BenchError::Io(e.into());
    w.write_record(header(n)).map_err(io)?;
    for r in reports {
        w.write_record(record(r, n)).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(reports: &[RmseReport], path: &Path) -> Result<(), BenchError> {
    let file = std::fs::File::create(path)?;
    write_csv_to(reports, std::io::BufWriter::new(file))
}
