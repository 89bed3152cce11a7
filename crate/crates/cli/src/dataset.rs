//! CSV ingestion in long (`t,value`) or wide (one row per index) layout.

use std::fmt;
use std::path::Path;

use serde::Deserialize;

use crate::config::DataFormat;
use crate::error::{CliError, Result};

/// Observations grouped by index; `series[t]` holds the values of index `t + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub series: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn new(series: Vec<Vec<f64>>) -> Result<Self> {
        if series.iter().all(|s| s.is_empty()) {
            return Err(CliError::Data("no observations".into()));
        }
        Ok(Self { series })
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.series.iter().map(Vec::len).collect()
    }

    pub fn all_values(&self) -> Vec<f64> {
        self.series.iter().flatten().copied().collect()
    }

    pub fn range(&self) -> (f64, f64) {
        self.series
            .iter()
            .flatten()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                (lo.min(x), hi.max(x))
            })
    }
}

impl fmt::Display for Dataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (lo, hi) = self.range();
        let sizes: Vec<String> = self.sizes().iter().map(usize::to_string).collect();
        writeln!(f, "T = {}", self.len())?;
        writeln!(f, "m_t = {}", sizes.join(","))?;
        writeln!(f, "min = {lo}")?;
        write!(f, "max = {hi}")
    }
}

pub fn ingest(path: &Path, format: DataFormat) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text, format).map_err(|e| match e {
        CliError::Data(m) => CliError::Data(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse(text: &str, format: DataFormat) -> Result<Dataset> {
    if text.trim().is_empty() {
        return Err(CliError::Data("empty file".into()));
    }
    match format {
        DataFormat::Long => parse_long(text),
        DataFormat::Wide => parse_wide(text),
    }
}

fn parse_value(field: &str, line: u64) -> Result<f64> {
    let x: f64 = field
        .trim()
        .parse()
        .map_err(|_| CliError::Data(format!("line {line}: {field:?} is not a number")))?;
    if !x.is_finite() {
        return Err(CliError::Data(format!("line {line}: value {field:?} is not finite")));
    }
    Ok(x)
}

#[derive(Deserialize)]
struct LongRecord {
    t: String,
    value: String,
}

fn parse_long(text: &str) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| CliError::Data(format!("line 1: {e}")))?
        .clone();
    for need in ["t", "value"] {
        if !headers.iter().any(|h| h == need) {
            return Err(CliError::Data(format!("line 1: header lacks a {need:?} column")));
        }
    }
    let mut series: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            CliError::Data(format!("line {line}: {e}"))
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let row: LongRecord = record
            .deserialize(Some(&headers))
            .map_err(|e| CliError::Data(format!("line {line}: {e}")))?;
        let t: usize = row
            .t
            .parse()
            .ok()
            .filter(|&t| t >= 1)
            .ok_or_else(|| CliError::Data(format!("line {line}: index {:?} is not a positive integer", row.t)))?;
        let x = parse_value(&row.value, line)?;
        if series.len() < t {
            series.resize(t, Vec::new());
        }
        series[t - 1].push(x);
    }
    Dataset::new(series)
}

/// Rows are indices `1, 2, ...`; blank lines are empty series, and trailing
/// blank lines are dropped.
fn parse_wide(text: &str) -> Result<Dataset> {
    let mut series = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i as u64 + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            series.push(Vec::new());
            continue;
        }
        let row = trimmed
            .split(',')
            .map(|f| parse_value(f, line))
            .collect::<Result<Vec<f64>>>()?;
        series.push(row);
    }
    while series.last().is_some_and(Vec::is_empty) {
        series.pop();
    }
    Dataset::new(series)
}
