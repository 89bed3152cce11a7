//! Plot-ready output tables. Floats use Rust's shortest round-trip form, so
//! identical runs give identical bytes.

use std::fs;
use std::path::Path;

use ddp_core::{ChainState, FitSummary, Partition64};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, Result};

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| csv_error(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::io(path, std::io::Error::other(format!("{other:?}"))),
    }
}

/// Shortest round-trip text; exponent form for very small or large magnitudes.
fn num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-5..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

pub fn write_summary(path: &Path, summary: &FitSummary, partition: &Partition64) -> Result<()> {
    let mut w = csv_writer(path)?;
    let err = |e| csv_error(path, e);
    w.write_record(["t", "k", "bin_left", "bin_right", "mean", "var", "cdf"])
        .map_err(err)?;
    for (t, ((mean, var), cdf)) in summary.mean.iter().zip(&summary.var).zip(&summary.cdf).enumerate() {
        for k in 0..partition.bins() {
            w.write_record([
                (t + 1).to_string(),
                (k + 1).to_string(),
                num(partition.left(k)),
                num(partition.right(k)),
                num(mean[k]),
                num(var[k]),
                num(cdf[k]),
            ])
            .map_err(err)?;
        }
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Header of a flattened state table: `F` then `N` (t-major, then k), then `G`.
fn state_header(first: &str, len: usize, bins: usize) -> Vec<String> {
    let mut h = vec![first.to_string()];
    for prefix in ["f", "n"] {
        for t in 1..=len {
            for k in 1..=bins {
                h.push(format!("{prefix}_{t}_{k}"));
            }
        }
    }
    h.extend((1..=bins).map(|k| format!("g_{k}")));
    h
}

fn state_row(label: usize, s: &ChainState<f64>) -> Vec<String> {
    let mut row = vec![label.to_string()];
    row.extend(s.f.iter().flat_map(|f| f.probs().iter().map(|&p| num(p))));
    row.extend(s.n.iter().flat_map(|n| n.counts().iter().map(u32::to_string)));
    row.extend(s.g.probs().iter().map(|&p| num(p)));
    row
}

/// One row per state, labelled by `labels` (sweep number or draw number).
pub fn write_states(path: &Path, first: &str, labels: &[usize], states: &[ChainState<f64>]) -> Result<()> {
    let mut w = csv_writer(path)?;
    let err = |e| csv_error(path, e);
    let (len, bins) = states.first().map_or((0, 0), |s| (s.f.len(), s.g.len()));
    w.write_record(state_header(first, len, bins)).map_err(err)?;
    for (&l, s) in labels.iter().zip(states) {
        w.write_record(state_row(l, s)).map_err(err)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

#[derive(Serialize)]
pub struct FitStats<'a> {
    pub lpml_log: f64,
    pub lpml_paper: f64,
    pub lmea: f64,
    pub nu: f64,
    pub lmea_variance: f64,
    pub lmea_bias: f64,
    pub zero_density: usize,
    /// Per index; `null` where no proposals were made.
    pub acceptance_rates: Vec<Option<f64>>,
    pub draws: usize,
    pub series: usize,
    pub bins: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub mu0: f64,
    pub sigma0: f64,
    pub g_mean: &'a [f64],
    pub config: &'a RunConfig,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("statistics serialize to JSON");
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// One row of the grid table; failed cells carry NaN statistics and the
/// error message in `status`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridRow {
    pub q: usize,
    pub c: u32,
    pub lpml_log: f64,
    pub lpml_paper: f64,
    pub lmea: f64,
    pub status: String,
}

pub fn write_grid(path: &Path, rows: &[GridRow]) -> Result<()> {
    let mut w = csv_writer(path)?;
    let err = |e| csv_error(path, e);
    w.write_record(["q", "c", "lpml_log", "lpml_paper", "lmea", "status"])
        .map_err(err)?;
    for r in rows {
        w.write_record([
            r.q.to_string(),
            r.c.to_string(),
            num(r.lpml_log),
            num(r.lpml_paper),
            num(r.lmea),
            r.status.clone(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_long_values(path: &Path, series: &[Vec<f64>]) -> Result<()> {
    let mut w = csv_writer(path)?;
    let err = |e| csv_error(path, e);
    w.write_record(["t", "value"]).map_err(err)?;
    for (t, xs) in series.iter().enumerate() {
        for &x in xs {
            w.write_record([(t + 1).to_string(), num(x)]).map_err(err)?;
        }
    }
    w.flush().map_err(|e| CliError::io(path, e))
}
