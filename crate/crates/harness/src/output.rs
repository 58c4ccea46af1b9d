//! Result files written to an output directory.
//!
//! * `iterations.csv`: one row per acquisition.
//! * `summary.csv`: [`SummaryRow`]s.
//! * `predictions.csv`: holdout predictions after every acquisition.
//! * `run.json`: resolved configuration, seeds, holdouts and early stops.
//!
//! Floats are written with the shortest representation that parses back to
//! the same value.

use std::fs;
use std::path::{Path, PathBuf};

use mfgp_core::{FidelityLevel, Strategy};
use serde_json::{json, Value};

use crate::experiment::{EarlyStop, ExperimentResult, IterationRecord};
use crate::summary::{summarize, SummaryRow};
use crate::HarnessError;

pub const ITERATIONS_FILE: &str = "iterations.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const PREDICTIONS_FILE: &str = "predictions.csv";
pub const MANIFEST_FILE: &str = "run.json";

fn csv_error(path: &Path, e: csv::Error) -> HarnessError {
    HarnessError::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>, HarnessError> {
    csv::Writer::from_path(path).map_err(|e| csv_error(path, e))
}

fn write_rows<I, R>(path: &Path, header: Vec<String>, rows: I) -> Result<(), HarnessError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = writer(path)?;
    w.write_record(&header).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn iterations_header(dim: usize) -> Vec<String> {
    let mut h: Vec<String> = ["strategy", "cost_high", "cost_low", "replication", "iteration", "level"]
        .map(String::from)
        .to_vec();
    h.extend((0..dim).map(|k| format!("x_{k}")));
    h.extend(
        ["rmse", "cumulative_cost", "pool_low_remaining", "pool_high_remaining"].map(String::from),
    );
    h
}

fn iteration_row(r: &IterationRecord) -> Vec<String> {
    let mut row = vec![
        r.strategy.as_str().to_string(),
        r.cost_high.to_string(),
        r.cost_low.to_string(),
        r.replication.to_string(),
        r.iteration.to_string(),
        r.level.as_str().to_string(),
    ];
    row.extend(r.point.iter().map(f64::to_string));
    row.extend([
        r.rmse.to_string(),
        r.cumulative_cost.to_string(),
        r.pool_low_remaining.to_string(),
        r.pool_high_remaining.to_string(),
    ]);
    row
}

/// Every record must have `dim` coordinates.
pub fn write_iterations<'a, I>(path: &Path, dim: usize, records: I) -> Result<(), HarnessError>
where
    I: IntoIterator<Item = &'a IterationRecord>,
{
    let rows: Vec<Vec<String>> = records
        .into_iter()
        .map(|r| {
            if r.point.len() == dim {
                Ok(iteration_row(r))
            } else {
                Err(HarnessError::Format {
                    path: path.to_path_buf(),
                    message: format!("record has {} coordinates, header has {dim}", r.point.len()),
                })
            }
        })
        .collect::<Result<_, _>>()?;
    write_rows(path, iterations_header(dim), rows)
}

/// Parses a file written by [`write_iterations`]. Returns the input dimension and the records.
pub fn read_iterations(path: &Path) -> Result<(usize, Vec<IterationRecord>), HarnessError> {
    let bad = |row: usize, message: String| HarnessError::Format {
        path: path.to_path_buf(),
        message: format!("row {row}: {message}"),
    };
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let dim = header.len().checked_sub(10).ok_or_else(|| bad(0, "too few columns".into()))?;
    let expected = iterations_header(dim);
    if header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(bad(0, "unexpected header".into()));
    }
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| csv_error(path, e))?;
        let n = i + 1;
        let f = |k: usize| row[k].parse::<f64>().map_err(|_| bad(n, format!("`{}` is not a number", &row[k])));
        let u = |k: usize| row[k].parse::<usize>().map_err(|_| bad(n, format!("`{}` is not a count", &row[k])));
        let strategy: Strategy = row[0].parse().map_err(|e| bad(n, format!("{e}")))?;
        let level = FidelityLevel::parse(&row[5]).ok_or_else(|| bad(n, format!("unknown level `{}`", &row[5])))?;
        let point = (0..dim).map(|k| f(6 + k)).collect::<Result<Vec<_>, _>>()?;
        out.push(IterationRecord {
            strategy,
            cost_high: f(1)?,
            cost_low: f(2)?,
            replication: u(3)?,
            iteration: u(4)?,
            level,
            point,
            rmse: f(6 + dim)?,
            cumulative_cost: f(7 + dim)?,
            pool_low_remaining: u(8 + dim)?,
            pool_high_remaining: u(9 + dim)?,
        });
    }
    Ok((dim, out))
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<(), HarnessError> {
    write_rows(
        path,
        SummaryRow::HEADER.map(String::from).to_vec(),
        rows.iter().map(|r| {
            [
                r.strategy.as_str().to_string(),
                r.cost_high.to_string(),
                r.cost_low.to_string(),
                r.iteration.to_string(),
                r.n.to_string(),
                r.rmse_median.to_string(),
                r.rmse_iqr.to_string(),
                r.cost_median.to_string(),
                r.cost_iqr.to_string(),
            ]
        }),
    )
}

pub const PREDICTIONS_HEADER: [&str; 8] = [
    "strategy",
    "cost_high",
    "cost_low",
    "replication",
    "iteration",
    "holdout_row",
    "prediction",
    "truth",
];

pub fn write_predictions(path: &Path, results: &[ExperimentResult]) -> Result<(), HarnessError> {
    let mut rows = Vec::new();
    for res in results {
        let c = &res.config;
        for rep in &res.replications {
            for (rec, preds) in rep.records.iter().zip(&rep.predictions) {
                for (j, (p, t)) in preds.iter().zip(&rep.holdout_truth).enumerate() {
                    rows.push([
                        c.strategy.as_str().to_string(),
                        c.cost_ratio.high.to_string(),
                        c.cost_ratio.low.to_string(),
                        rep.index.to_string(),
                        rec.iteration.to_string(),
                        j.to_string(),
                        p.to_string(),
                        t.to_string(),
                    ]);
                }
            }
        }
    }
    write_rows(path, PREDICTIONS_HEADER.map(String::from).to_vec(), rows)
}

fn early_stop_json(stop: &Option<EarlyStop>) -> Value {
    match stop {
        None => Value::Null,
        Some(EarlyStop::PoolExhausted { iteration, level }) => json!({
            "reason": "pool_exhausted",
            "iteration": iteration,
            "level": level.map(FidelityLevel::as_str),
        }),
        Some(EarlyStop::Threshold { iteration }) => json!({
            "reason": "rmse_threshold",
            "iteration": iteration,
        }),
    }
}

pub fn manifest(results: &[ExperimentResult]) -> Value {
    let runs: Vec<Value> = results
        .iter()
        .map(|res| {
            let reps: Vec<Value> = res
                .replications
                .iter()
                .map(|r| {
                    json!({
                        "replication": r.index,
                        "seed": r.seed,
                        "holdout_indices": r.holdout_indices,
                        "initial_rmse": r.initial_rmse,
                        "iterations_completed": r.records.len(),
                        "early_stop": early_stop_json(&r.early_stop),
                    })
                })
                .collect();
            json!({ "config": res.config, "replications": reps })
        })
        .collect();
    json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "runs": runs,
    })
}

/// Writes all four files into `dir`, creating it if needed, and returns the summary.
/// An empty `results` gives header-only CSV files.
pub fn emit_results(dir: &Path, results: &[ExperimentResult]) -> Result<Vec<SummaryRow>, HarnessError> {
    let io = |path: PathBuf| move |source| HarnessError::Io { path, source };
    fs::create_dir_all(dir).map_err(io(dir.to_path_buf()))?;
    let dim = results.first().map_or(0, |r| r.dim);
    if results.iter().any(|r| r.dim != dim) {
        return Err(HarnessError::Config("results mix problems of different dimension".into()));
    }
    let records: Vec<&IterationRecord> = results.iter().flat_map(|r| r.records()).collect();
    let summary = summarize(records.iter().copied());
    write_iterations(&dir.join(ITERATIONS_FILE), dim, records.iter().copied())?;
    write_summary(&dir.join(SUMMARY_FILE), &summary)?;
    write_predictions(&dir.join(PREDICTIONS_FILE), results)?;
    let path = dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest(results)).expect("manifest is plain JSON");
    fs::write(&path, text + "\n").map_err(io(path.clone()))?;
    Ok(summary)
}
