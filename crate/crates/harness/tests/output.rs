use std::fs;

use mfgp_core::{FidelityLevel, Strategy};
use mfgp_harness::config::{CostRatio, ExperimentConfig, ProblemKind};
use mfgp_harness::experiment::{run_experiment, IterationRecord};
use mfgp_harness::output::{emit_results, read_iterations, write_iterations};
use mfgp_harness::summary::{final_rows, summarize};

fn record(replication: usize, iteration: usize, rmse: f64, cost: f64) -> IterationRecord {
    IterationRecord {
        strategy: Strategy::IfUcr,
        cost_high: 5.0,
        cost_low: 1.0,
        replication,
        iteration,
        level: FidelityLevel::Low,
        point: vec![0.1, 1.0 / 3.0],
        rmse,
        cumulative_cost: cost,
        pool_low_remaining: 9,
        pool_high_remaining: 10,
    }
}

#[test]
fn iterations_csv_round_trips_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("it.csv");
    let mut recs = vec![record(0, 1, 0.1 + 0.2, 1.0), record(1, 1, 1e-300, 5.0)];
    recs[1].level = FidelityLevel::High;
    recs[1].strategy = Strategy::IfUcrBel;
    recs[1].point = vec![f64::MIN_POSITIVE, 0.999_999_999_999_999_9];
    write_iterations(&path, 2, &recs).unwrap();
    let (dim, back) = read_iterations(&path).unwrap();
    assert_eq!(dim, 2);
    assert_eq!(back, recs);
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with(
        "strategy,cost_high,cost_low,replication,iteration,level,x_0,x_1,rmse,cumulative_cost,pool_low_remaining,pool_high_remaining\n"
    ));
}

#[test]
fn dimension_mismatch_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    assert!(write_iterations(&dir.path().join("x.csv"), 3, &[record(0, 1, 1.0, 1.0)]).is_err());
}

#[test]
fn empty_results_give_header_only_files() {
    let dir = tempfile::tempdir().unwrap();
    let summary = emit_results(dir.path(), &[]).unwrap();
    assert!(summary.is_empty());
    for f in ["iterations.csv", "summary.csv", "predictions.csv"] {
        let text = fs::read_to_string(dir.path().join(f)).unwrap();
        assert_eq!(text.lines().count(), 1, "{f}");
    }
    let (_, recs) = read_iterations(&dir.path().join("iterations.csv")).unwrap();
    assert!(recs.is_empty());
}

#[test]
fn summarize_uses_median_and_type7_iqr() {
    let recs: Vec<_> = [1.0, 4.0, 2.0, 3.0]
        .iter()
        .enumerate()
        .map(|(r, &v)| record(r, 1, v, 10.0 * v))
        .collect();
    let rows = summarize(&recs);
    assert_eq!(rows.len(), 1);
    let r = &rows[0];
    assert_eq!((r.n, r.iteration), (4, 1));
    assert_eq!(r.rmse_median, 2.5);
    assert_eq!(r.rmse_iqr, 1.5);
    assert_eq!(r.cost_median, 25.0);
    assert_eq!(r.cost_iqr, 15.0);
}

#[test]
fn summarize_degenerate_cases() {
    let one = summarize(&[record(0, 1, 0.7, 3.0)]);
    assert_eq!((one[0].rmse_median, one[0].rmse_iqr, one[0].cost_median, one[0].cost_iqr), (0.7, 0.0, 3.0, 0.0));
    let same: Vec<_> = (0..5).map(|r| record(r, 1, 0.3, 2.0)).collect();
    let rows = summarize(&same);
    assert_eq!((rows[0].n, rows[0].rmse_iqr, rows[0].cost_iqr), (5, 0.0, 0.0));
    let odd: Vec<_> = [3.0, 1.0, 2.0].iter().enumerate().map(|(r, &c)| record(r, 1, 1.0, c)).collect();
    assert_eq!(summarize(&odd)[0].cost_median, 2.0);
}

#[test]
fn summarize_groups_and_orders() {
    let mut recs = vec![record(0, 2, 1.0, 2.0), record(0, 1, 2.0, 1.0)];
    let mut other = record(0, 1, 3.0, 1.0);
    other.strategy = Strategy::MfUcr;
    recs.push(other);
    let mut ratio = record(0, 1, 3.0, 1.0);
    ratio.cost_high = 2.0;
    recs.push(ratio);
    let rows = summarize(&recs);
    let keys: Vec<_> = rows.iter().map(|r| (r.strategy, r.cost_high, r.iteration)).collect();
    assert_eq!(
        keys,
        vec![
            (Strategy::MfUcr, 5.0, 1),
            (Strategy::IfUcr, 2.0, 1),
            (Strategy::IfUcr, 5.0, 1),
            (Strategy::IfUcr, 5.0, 2)
        ]
    );
    let fin: Vec<_> = final_rows(&rows).iter().map(|r| (r.cost_high, r.iteration)).collect();
    assert_eq!(fin, vec![(5.0, 1), (2.0, 1), (5.0, 2)]);
}

#[test]
fn emitted_files_are_consistent() {
    let mut c = ExperimentConfig::new(ProblemKind::Forrester);
    c.cost_ratio = CostRatio::new(10.0, 1.0);
    c.iterations = Some(3);
    c.replications = 2;
    c.holdout_size = Some(20);
    c.chain.length = 300;
    c.chain.adapt_steps = 100;
    let res = run_experiment(&c).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let summary = emit_results(dir.path(), std::slice::from_ref(&res)).unwrap();
    assert_eq!(summary.len(), 3);

    let (_, recs) = read_iterations(&dir.path().join("iterations.csv")).unwrap();
    assert_eq!(recs, res.records().cloned().collect::<Vec<_>>());

    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("run.json")).unwrap()).unwrap();
    let run = &json["runs"][0];
    assert_eq!(run["config"]["cost_ratio"], "10:1");
    assert_eq!(run["config"]["iterations"], 3);
    assert_eq!(run["replications"][1]["seed"], 1);
    assert!(run["replications"][0]["early_stop"].is_null());
    assert_eq!(json["version"], env!("CARGO_PKG_VERSION"));

    // Holdout RMSE recomputed from predictions.csv matches iterations.csv.
    let mut reader = csv::Reader::from_path(dir.path().join("predictions.csv")).unwrap();
    let mut sse = std::collections::BTreeMap::<(usize, usize), (f64, usize)>::new();
    for row in reader.records() {
        let row = row.unwrap();
        let key = (row[3].parse().unwrap(), row[4].parse().unwrap());
        let (p, t): (f64, f64) = (row[6].parse().unwrap(), row[7].parse().unwrap());
        let e = sse.entry(key).or_insert((0.0, 0));
        e.0 += (p - t) * (p - t);
        e.1 += 1;
    }
    for r in &recs {
        let (s, n) = sse[&(r.replication, r.iteration)];
        assert_eq!(n, 20);
        assert_eq!((s / n as f64).sqrt(), r.rmse);
    }
}
