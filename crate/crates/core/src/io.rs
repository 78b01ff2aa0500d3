//! CSV and JSON exports. Every file starts with the run configuration, and
//! floats in CSV files carry 17 significant digits.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::config::RunConfig;
use crate::{Error, Result};

/// Fixed 17-significant-digit scientific notation.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn float_row(xs: &[f64]) -> Vec<String> {
    xs.iter().map(|x| fmt_float(*x)).collect()
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse {
            line: 0,
            reason: format!("{other:?}"),
        },
    }
}

/// Writes `rows` under `header`, preceded by a `# config:` comment line.
pub fn write_csv(
    path: impl AsRef<Path>,
    config: &RunConfig,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "# config: {}", serde_json::to_string(config)?)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::arg(
                "rows",
                format!("{} fields for {} columns", row.len(), header.len()),
            ));
        }
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    config: &'a RunConfig,
    report: &'a T,
}

/// Pretty JSON `{"config": …, "report": …}`.
pub fn to_json_report<T: Serialize>(config: &RunConfig, report: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&Envelope { config, report })?;
    s.push('\n');
    Ok(s)
}

pub fn write_json(path: impl AsRef<Path>, config: &RunConfig, report: &impl Serialize) -> Result<()> {
    std::fs::write(path, to_json_report(config, report)?)?;
    Ok(())
}

/// Reads the first two numeric columns of a CSV file as `(r, f)`, skipping
/// `#` comments and a non-numeric header row.
pub fn read_samples(path: impl AsRef<Path>) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(csv_err)?;
    let (mut r, mut f) = (Vec::new(), Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(i + 1, |p| p.line() as usize);
        let parse = |k: usize| rec.get(k).and_then(|x| x.parse::<f64>().ok());
        match (parse(0), parse(1)) {
            (Some(a), Some(b)) => {
                r.push(a);
                f.push(b);
            }
            _ if r.is_empty() && i == 0 => continue,
            _ => {
                return Err(Error::Parse {
                    line,
                    reason: "expected two numeric columns".into(),
                })
            }
        }
    }
    Ok((r, f))
}
