//! Text input formats: the two-column sample CSV and whitespace or comma
//! separated numeric tables.

use crate::dcor::ObservationSet;
use crate::dist::PairedSample;
use crate::error::{Error, Result};

fn fields(line: &str) -> Vec<&str> {
    if line.contains(',') {
        line.split(',').map(str::trim).collect()
    } else {
        line.split_whitespace().collect()
    }
}

/// Parses `x,y` integer records. A single leading header line is skipped if
/// it does not parse as numbers. Blank lines are ignored; CRLF is accepted.
pub fn parse_sample_csv(text: &str) -> Result<PairedSample> {
    let mut records = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r').trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed = (cols.len() == 2)
            .then(|| Some((cols[0].parse::<i64>().ok()?, cols[1].parse::<i64>().ok()?)))
            .flatten();
        match parsed {
            Some(rec) => records.push(rec),
            None if records.is_empty() && idx == 0 => continue,
            None => {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("expected two integer columns, got {line:?}"),
                })
            }
        }
    }
    if records.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(PairedSample::new(records))
}

/// Parses a numeric table with whitespace- or comma-separated columns. Lines
/// starting with `#` and blank lines are skipped, as is a non-numeric first
/// line. All rows must have the same width.
pub fn parse_numeric_table(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> =
            fields(line).iter().map(|f| f.parse::<f64>()).collect();
        let row = match parsed {
            Ok(row) => row,
            Err(_) if rows.is_empty() && idx == 0 => continue,
            Err(e) => {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: e.to_string(),
                })
            }
        };
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("expected {} columns, got {}", first.len(), row.len()),
                });
            }
        }
        for (col, v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("non-finite value in column {}", col + 1),
                });
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Each row is `alpha, beta_1, ..., beta_d`.
pub fn parse_observation_table(text: &str) -> Result<ObservationSet> {
    let rows = parse_numeric_table(text)?;
    if rows.first().is_some_and(|r| r.len() < 2) {
        return Err(Error::Parse {
            line: 1,
            message: "need a scalar column and at least one vector column".into(),
        });
    }
    let (alpha, beta) = rows
        .into_iter()
        .map(|mut r| {
            let a = r.remove(0);
            (a, r)
        })
        .unzip();
    ObservationSet::new(alpha, beta)
}
