//! Problem ingestion: JSON documents and bordered CSV.
//!
//! Bordered CSV mirrors the usual way these problems are written down:
//!
//! ```text
//!  ,4,4,2,1
//! 6,1,0,0,0
//! 6,1,1,0,0
//! 4,1,1,7,2
//! 1,1,1,9,6
//! ```
//!
//! Cell (0,0) is empty, the first row holds column targets and the first
//! column holds row targets.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::CliError;
use crate::exact::{self, parse_ratio, Ratio};
use crate::problem::Problem;

/// JSON form of a problem. Numbers may be JSON numbers or strings holding
/// decimals or fractions (`"17/11"`); both are read exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemDocument {
    pub matrix: Vec<Vec<Value>>,
    pub row_sums: Vec<Value>,
    pub col_sums: Vec<Value>,
}

impl ProblemDocument {
    /// With `exact` set every value is written as a fraction string, so
    /// reading the document back gives the identical problem.
    pub fn from_problem(problem: &Problem, exact: bool) -> Self {
        let enc = |x: &Ratio| -> Value {
            if exact {
                Value::String(exact::fraction_string(x))
            } else {
                serde_json::Number::from_f64(exact::to_f64(x)).map_or(Value::Null, Value::Number)
            }
        };
        Self {
            matrix: problem.matrix().to_rows().iter().map(|row| row.iter().map(enc).collect()).collect(),
            row_sums: problem.row_targets().iter().map(enc).collect(),
            col_sums: problem.col_targets().iter().map(enc).collect(),
        }
    }

    pub fn to_problem(&self) -> Result<Problem, CliError> {
        let matrix = self
            .matrix
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter().enumerate().map(|(j, v)| value_to_ratio(v, &format!("matrix[{i}][{j}]"))).collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        let r = values_to_ratios(&self.row_sums, "row_sums")?;
        let c = values_to_ratios(&self.col_sums, "col_sums")?;
        Ok(Problem::from_rows(matrix, r, c)?)
    }
}

fn values_to_ratios(values: &[Value], field: &str) -> Result<Vec<Ratio>, CliError> {
    values.iter().enumerate().map(|(k, v)| value_to_ratio(v, &format!("{field}[{k}]"))).collect()
}

fn value_to_ratio(v: &Value, location: &str) -> Result<Ratio, CliError> {
    let text = match v {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        other => {
            return Err(CliError::Parse { location: location.into(), message: format!("expected a number, found {other}") });
        }
    };
    parse_ratio(&text).map_err(|e| CliError::Parse { location: location.into(), message: e.to_string() })
}

pub fn parse_json(text: &str) -> Result<Problem, CliError> {
    let doc: ProblemDocument = serde_json::from_str(text)
        .map_err(|e| CliError::Parse { location: format!("line {}, column {}", e.line(), e.column()), message: e.to_string() })?;
    doc.to_problem()
}

pub fn parse_bordered_csv(text: &str) -> Result<Problem, CliError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut col_targets: Option<Vec<Ratio>> = None;
    let mut row_targets = Vec::new();
    let mut matrix = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Parse {
            location: e.position().map_or_else(|| "input".into(), |p| format!("line {}", p.line())),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        let cell = |k: usize| -> Result<Ratio, CliError> { parse_csv_cell(&record[k], line, k + 1) };
        match &col_targets {
            None => {
                if !record[0].is_empty() {
                    return Err(CliError::Parse {
                        location: format!("line {line}, column 1"),
                        message: "top-left cell of a bordered matrix must be empty".into(),
                    });
                }
                col_targets = Some((1..record.len()).map(cell).collect::<Result<_, _>>()?);
            }
            Some(cols) => {
                if record.len() != cols.len() + 1 {
                    return Err(CliError::Parse {
                        location: format!("line {line}"),
                        message: format!("expected {} fields, found {}", cols.len() + 1, record.len()),
                    });
                }
                row_targets.push(cell(0)?);
                matrix.push((1..record.len()).map(cell).collect::<Result<Vec<_>, _>>()?);
            }
        }
    }
    let col_targets = col_targets.ok_or_else(|| CliError::Parse { location: "input".into(), message: "empty CSV".into() })?;
    Ok(Problem::from_rows(matrix, row_targets, col_targets)?)
}

fn parse_csv_cell(text: &str, line: u64, column: usize) -> Result<Ratio, CliError> {
    let location = format!("line {line}, column {column}");
    if text.contains('/') {
        return Err(CliError::Parse { location, message: format!("`{text}` is not a plain decimal") });
    }
    parse_ratio(text).map_err(|e| CliError::Parse { location, message: e.to_string() })
}

/// JSON when the first non-blank character is `{`, bordered CSV otherwise.
pub fn parse_problem_text(text: &str) -> Result<Problem, CliError> {
    if text.trim_start().starts_with('{') {
        parse_json(text)
    } else {
        parse_bordered_csv(text)
    }
}
