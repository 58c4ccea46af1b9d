//! Per-iteration aggregates across replications.

use std::collections::BTreeMap;

use mfgp_core::stats::{median, quartiles};
use mfgp_core::Strategy;

use crate::experiment::IterationRecord;

/// Median and interquartile range (type-7 quantiles) over the replications
/// that reached `iteration`.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub strategy: Strategy,
    pub cost_high: f64,
    pub cost_low: f64,
    pub iteration: usize,
    pub n: usize,
    pub rmse_median: f64,
    pub rmse_iqr: f64,
    pub cost_median: f64,
    pub cost_iqr: f64,
}

impl SummaryRow {
    pub const HEADER: [&'static str; 9] = [
        "strategy",
        "cost_high",
        "cost_low",
        "iteration",
        "n",
        "rmse_median",
        "rmse_iqr",
        "cost_median",
        "cost_iqr",
    ];
}

fn strategy_rank(s: Strategy) -> usize {
    match s {
        Strategy::MfUcr => 0,
        Strategy::IfUcr => 1,
        Strategy::IfUcrBel => 2,
        Strategy::SingleUs => 3,
    }
}

fn iqr(values: &[f64]) -> f64 {
    let (q1, q3) = quartiles(values);
    q3 - q1
}

/// Rows ordered by strategy, cost ratio and iteration.
pub fn summarize<'a, I>(records: I) -> Vec<SummaryRow>
where
    I: IntoIterator<Item = &'a IterationRecord>,
{
    type Key = (usize, u64, u64, usize);
    type Group = (Strategy, f64, f64, Vec<f64>, Vec<f64>);
    let mut groups: BTreeMap<Key, Group> = BTreeMap::new();
    for r in records {
        // Costs are positive, so their bit patterns sort like the values.
        let key = (strategy_rank(r.strategy), r.cost_high.to_bits(), r.cost_low.to_bits(), r.iteration);
        let g = groups
            .entry(key)
            .or_insert_with(|| (r.strategy, r.cost_high, r.cost_low, Vec::new(), Vec::new()));
        g.3.push(r.rmse);
        g.4.push(r.cumulative_cost);
    }
    groups
        .into_iter()
        .map(|((.., iteration), (strategy, cost_high, cost_low, rmse, cost))| SummaryRow {
            strategy,
            cost_high,
            cost_low,
            iteration,
            n: rmse.len(),
            rmse_median: median(&rmse),
            rmse_iqr: iqr(&rmse),
            cost_median: median(&cost),
            cost_iqr: iqr(&cost),
        })
        .collect()
}

/// The row for the last iteration of each (strategy, cost ratio) group.
pub fn final_rows(rows: &[SummaryRow]) -> Vec<&SummaryRow> {
    let mut out: Vec<&SummaryRow> = Vec::new();
    for row in rows {
        match out.last_mut() {
            Some(last) if last.strategy == row.strategy && last.cost_high == row.cost_high && last.cost_low == row.cost_low => {
                *last = row
            }
            _ => out.push(row),
        }
    }
    out
}
