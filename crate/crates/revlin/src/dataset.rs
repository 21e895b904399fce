//! CSV ingestion for regression data.
//!
//! Schema: the first non-blank line is a header and is not
//! interpreted; every following line is one data point. All columns
//! but the last are features, the last column is the target. Values
//! use the rational text forms (integer, p/q, or finite decimal).

use crate::error::{Result, RevError};
use crate::rational::Rational;

/// Parses CSV text into feature points (one row per data point) and
/// targets. A one-column file has zero features and is only useful
/// together with a bias term.
pub fn parse_csv(text: &str) -> Result<(Vec<Vec<Rational>>, Vec<Rational>)> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| RevError::Parse("empty CSV: missing header line".into()))?;
    let width = header.split(',').count();

    let mut points = Vec::new();
    let mut targets = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != width {
            return Err(RevError::Parse(format!(
                "CSV line {line_no}: expected {width} columns, found {}",
                fields.len()
            )));
        }
        let mut row = Vec::with_capacity(width);
        for (col, field) in fields.iter().enumerate() {
            let value: Rational = field.parse().map_err(|err| {
                let detail = match err {
                    RevError::Parse(msg) => msg,
                    other => other.to_string(),
                };
                RevError::Parse(format!("CSV line {line_no}, column {}: {detail}", col + 1))
            })?;
            row.push(value);
        }
        targets.push(row.pop().expect("width is at least one"));
        points.push(row);
    }
    if points.is_empty() {
        return Err(RevError::Parse("CSV has a header but no data rows".into()));
    }
    Ok((points, targets))
}
