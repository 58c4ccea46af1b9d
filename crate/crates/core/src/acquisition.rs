//! Choosing the next run: where, and on which fidelity.
//!
//! All selectors scan finite candidate pools. Ties go to the low-fidelity pool
//! first, then to the lowest row index, so every choice is reproducible.
//!
//! | strategy       | score of a low candidate        | score of a high candidate       |
//! |----------------|---------------------------------|---------------------------------|
//! | `mf_ucr`       | two-step, see [`select_mf_ucr`] |                                 |
//! | `if_ucr`       | `sd_eta / C_L`                  | `sd_delta / C_H`                |
//! | `if_ucr_bel`   | `(sd_y - sd_y^bel,low) / C_L`   | `(sd_y - sd_y^bel,high) / C_H`  |

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::gp::CondensedGP;
use crate::mf::{FidelityLevel, MultiFidelityModel};
use crate::{Error, Result};

/// Per-run costs `C_L` and `C_H`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModel {
    cost_low: f64,
    cost_high: f64,
}

impl CostModel {
    pub fn new(cost_low: f64, cost_high: f64) -> Result<Self> {
        if !(cost_low > 0.0 && cost_low.is_finite() && cost_high.is_finite()) {
            return Err(Error::invalid("costs must be positive and finite"));
        }
        if cost_high < cost_low {
            return Err(Error::invalid("high-fidelity cost must be at least the low-fidelity cost"));
        }
        Ok(CostModel { cost_low, cost_high })
    }

    pub fn cost_low(&self) -> f64 {
        self.cost_low
    }

    pub fn cost_high(&self) -> f64 {
        self.cost_high
    }

    pub fn cost_of(&self, level: FidelityLevel) -> f64 {
        match level {
            FidelityLevel::Low => self.cost_low,
            FidelityLevel::High => self.cost_high,
        }
    }
}

/// Prospective inputs for one fidelity. Rows are consumed once used.
#[derive(Debug, Clone, PartialEq)]
pub struct Pool {
    dim: usize,
    points: Vec<f64>,
    consumed: Vec<bool>,
}

impl Pool {
    pub fn new(dim: usize, points: Vec<f64>) -> Result<Self> {
        if dim == 0 || !points.len().is_multiple_of(dim) {
            return Err(Error::invalid("pool buffer is not a whole number of rows"));
        }
        let n = points.len() / dim;
        Ok(Pool {
            dim,
            points,
            consumed: alloc::vec![false; n],
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(dim: usize, rows: &[R]) -> Result<Self> {
        let mut points = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            if r.as_ref().len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: r.as_ref().len(),
                });
            }
            points.extend_from_slice(r.as_ref());
        }
        Self::new(dim, points)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Rows including consumed ones.
    pub fn len(&self) -> usize {
        self.consumed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.consumed.is_empty()
    }

    pub fn remaining(&self) -> usize {
        self.consumed.iter().filter(|c| !**c).count()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn is_consumed(&self, i: usize) -> bool {
        self.consumed[i]
    }

    pub fn consume(&mut self, i: usize) {
        self.consumed[i] = true;
    }

    /// Unconsumed rows with their indices, in index order.
    pub fn available(&self) -> impl Iterator<Item = (usize, &[f64])> + '_ {
        self.points
            .chunks_exact(self.dim)
            .enumerate()
            .filter(move |(i, _)| !self.consumed[*i])
    }

    /// Unconsumed row closest to `x` in Euclidean distance; ties to the lowest index.
    pub fn nearest(&self, x: &[f64]) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, row) in self.available() {
            let d: f64 = row.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        best.map(|(i, _)| i)
    }
}

/// Low- and high-fidelity prospective pools. They need not be collocated.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidatePool {
    pub low: Pool,
    pub high: Pool,
}

impl CandidatePool {
    pub fn new(low: Pool, high: Pool) -> Result<Self> {
        if low.dim() != high.dim() {
            return Err(Error::DimensionMismatch {
                expected: low.dim(),
                got: high.dim(),
            });
        }
        Ok(CandidatePool { low, high })
    }

    pub fn pool(&self, level: FidelityLevel) -> &Pool {
        match level {
            FidelityLevel::Low => &self.low,
            FidelityLevel::High => &self.high,
        }
    }

    pub fn pool_mut(&mut self, level: FidelityLevel) -> &mut Pool {
        match level {
            FidelityLevel::Low => &mut self.low,
            FidelityLevel::High => &mut self.high,
        }
    }

    pub fn consume(&mut self, decision: &Decision) {
        self.pool_mut(decision.level).consume(decision.index);
    }

    fn levels(&self) -> impl Iterator<Item = (FidelityLevel, usize, &[f64])> + '_ {
        let low = self.low.available().map(|(i, r)| (FidelityLevel::Low, i, r));
        let high = self.high.available().map(|(i, r)| (FidelityLevel::High, i, r));
        low.chain(high)
    }
}

/// Next run: a row of the pool belonging to `level`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub point: Vec<f64>,
    pub level: FidelityLevel,
    /// Row index within the pool of `level`.
    pub index: usize,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Strategy {
    /// Max MF-UCR: argmax of total variance, then a cost-ratio fidelity rule.
    MfUcr,
    /// Max IF-UCR: per-fidelity uncertainty over cost in one step.
    IfUcr,
    /// Max IF-UCR with believer variance reduction.
    IfUcrBel,
    /// Single-fidelity uncertainty sampling on the high-fidelity data only.
    SingleUs,
}

impl Strategy {
    pub const MULTI_FIDELITY: [Strategy; 3] = [Strategy::MfUcr, Strategy::IfUcr, Strategy::IfUcrBel];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::MfUcr => "mf_ucr",
            Strategy::IfUcr => "if_ucr",
            Strategy::IfUcrBel => "if_ucr_bel",
            Strategy::SingleUs => "single_us",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "mf_ucr" => Ok(Strategy::MfUcr),
            "if_ucr" => Ok(Strategy::IfUcr),
            "if_ucr_bel" => Ok(Strategy::IfUcrBel),
            "single_us" => Ok(Strategy::SingleUs),
            other => Err(Error::invalid(alloc::format!("unknown strategy `{other}`"))),
        }
    }
}

/// Running argmax over candidates visited low pool first. Strict `>` keeps the earliest.
struct Best {
    found: Option<(FidelityLevel, usize, f64)>,
}

impl Best {
    fn new() -> Self {
        Best { found: None }
    }

    fn offer(&mut self, level: FidelityLevel, index: usize, score: f64) {
        if !score.is_finite() {
            return;
        }
        if self.found.is_none_or(|(_, _, s)| score > s) {
            self.found = Some((level, index, score));
        }
    }
}

/// Uncertainty sampling: the unconsumed row with the largest predictive variance.
/// The decision is labelled high fidelity.
pub fn select_uncertainty(gp: &CondensedGP, pool: &Pool) -> Result<Decision> {
    let mut best = Best::new();
    for (i, row) in pool.available() {
        best.offer(FidelityLevel::High, i, gp.predict_variance(row));
    }
    let (level, index, score) = best
        .found
        .ok_or_else(|| Error::invalid("candidate pool is empty"))?;
    Ok(Decision {
        point: pool.row(index).to_vec(),
        level,
        index,
        score,
    })
}

/// Max MF-UCR. `x*` maximizes the total standard deviation over both pools;
/// the run is low fidelity iff `sd_eta(x*) / C_L >= sd_delta(x*) / C_H`.
/// When `x*` came from the other pool, the nearest unconsumed row of the
/// chosen level's pool is taken instead. The score is `sd_total(x*)`.
pub fn select_mf_ucr(model: &MultiFidelityModel, pools: &CandidatePool, cost: &CostModel) -> Result<Decision> {
    let mut best = Best::new();
    for (level, i, row) in pools.levels() {
        best.offer(level, i, model.predict(row).sd_total());
    }
    let (source, index, score) = best
        .found
        .ok_or_else(|| Error::invalid("both candidate pools are empty"))?;
    let x_star = pools.pool(source).row(index);
    let p = model.predict(x_star);
    let level = if p.sd_eta() / cost.cost_low() >= p.sd_delta() / cost.cost_high() {
        FidelityLevel::Low
    } else {
        FidelityLevel::High
    };
    let index = if level == source {
        index
    } else {
        pools
            .pool(level)
            .nearest(x_star)
            .ok_or(Error::PoolExhausted(level))?
    };
    Ok(Decision {
        point: pools.pool(level).row(index).to_vec(),
        level,
        index,
        score,
    })
}

fn select_scored(
    pools: &CandidatePool,
    mut score: impl FnMut(FidelityLevel, &[f64]) -> f64,
) -> Result<Decision> {
    let mut best = Best::new();
    for (level, i, row) in pools.levels() {
        best.offer(level, i, score(level, row));
    }
    let (level, index, score) = best
        .found
        .ok_or_else(|| Error::invalid("both candidate pools are empty"))?;
    Ok(Decision {
        point: pools.pool(level).row(index).to_vec(),
        level,
        index,
        score,
    })
}

/// Max IF-UCR: low rows score `sd_eta / C_L`, high rows `sd_delta / C_H`.
pub fn select_if_ucr(model: &MultiFidelityModel, pools: &CandidatePool, cost: &CostModel) -> Result<Decision> {
    select_scored(pools, |level, x| {
        let p = model.predict(x);
        match level {
            FidelityLevel::Low => p.sd_eta() / cost.cost_low(),
            FidelityLevel::High => p.sd_delta() / cost.cost_high(),
        }
    })
}

/// Reduction of the total standard deviation at `x` from a believer at `x` on `level`.
pub fn believer_reduction(model: &MultiFidelityModel, x: &[f64], level: FidelityLevel) -> f64 {
    let sd = model.predict(x).sd_total();
    let sd_bel = libm::sqrt(model.believer_variance(x, x, level));
    sd - sd_bel
}

/// Max IF-UCR-Bel: each row scores its own believer reduction over its level's cost.
pub fn select_if_ucr_bel(model: &MultiFidelityModel, pools: &CandidatePool, cost: &CostModel) -> Result<Decision> {
    select_scored(pools, |level, x| believer_reduction(model, x, level) / cost.cost_of(level))
}

/// Dispatches to the multi-fidelity selectors. `SingleUs` is not a multi-fidelity strategy.
pub fn select(strategy: Strategy, model: &MultiFidelityModel, pools: &CandidatePool, cost: &CostModel) -> Result<Decision> {
    match strategy {
        Strategy::MfUcr => select_mf_ucr(model, pools, cost),
        Strategy::IfUcr => select_if_ucr(model, pools, cost),
        Strategy::IfUcrBel => select_if_ucr_bel(model, pools, cost),
        Strategy::SingleUs => Err(Error::invalid("single_us selects on a single-fidelity GP")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::{Hyperparameters, TrainingSet};
    use crate::scaling::OutputScaling;
    use alloc::vec;
    use proptest::prelude::{prop_assert, prop_assert_eq, prop_oneof, proptest, Just};
    use super::Strategy;

    fn gp1(xs: &[f64], s: f64, b: f64, l: f64) -> CondensedGP {
        let train = TrainingSet::new(1, xs.to_vec(), vec![0.0; xs.len()]).unwrap();
        CondensedGP::new(train, Hyperparameters::isotropic(s, b, l, 1).unwrap()).unwrap()
    }

    fn model(eta_x: &[f64], se: f64, delta_x: &[f64], sd: f64) -> MultiFidelityModel {
        MultiFidelityModel::from_parts(gp1(eta_x, se, 8.0, 0.01), gp1(delta_x, sd, 8.0, 0.01), OutputScaling::IDENTITY)
            .unwrap()
    }

    fn pool1(xs: &[f64]) -> Pool {
        Pool::new(1, xs.to_vec()).unwrap()
    }

    #[test]
    fn cost_model_validation() {
        assert!(CostModel::new(0.0, 1.0).is_err());
        assert!(CostModel::new(2.0, 1.0).is_err());
        assert!(CostModel::new(1.0, 1.0).is_ok());
    }

    #[test]
    fn uncertainty_prefers_distant_point() {
        let gp = gp1(&[0.2], 1.0, 10.0, 0.0);
        let d = select_uncertainty(&gp, &pool1(&[0.2, 0.9])).unwrap();
        assert_eq!(d.index, 1);
        let d = select_uncertainty(&gp, &pool1(&[0.21])).unwrap();
        assert_eq!(d.index, 0);
        assert!(select_uncertainty(&gp, &pool1(&[])).is_err());
    }

    #[test]
    fn uncertainty_skips_consumed_rows() {
        let gp = gp1(&[0.2], 1.0, 10.0, 0.0);
        let mut pool = pool1(&[0.2, 0.9, 0.5]);
        pool.consume(1);
        assert_eq!(select_uncertainty(&gp, &pool).unwrap().index, 2);
    }

    #[test]
    fn uncertainty_matches_exhaustive_scan() {
        let gp = gp1(&[0.5], 1.0, 3.0, 0.0);
        let rows = [0.45, 0.1, 0.7];
        // one-point GP: V = 1 - exp(-2 * 3 d^2) / (1 + jitter)
        let v: Vec<f64> = rows
            .iter()
            .map(|x| 1.0 - libm::exp(-6.0 * (x - 0.5) * (x - 0.5)) / (1.0 + gp.jitter()))
            .collect();
        let argmax = (0..3).fold(0, |b, i| if v[i] > v[b] { i } else { b });
        assert_eq!(select_uncertainty(&gp, &pool1(&rows)).unwrap().index, argmax);
    }

    #[test]
    fn mf_ucr_tie_goes_low() {
        // identical GPs: sd_eta == sd_delta everywhere, equal costs
        let m = model(&[0.0], 1.0, &[0.0], 1.0);
        let pools = CandidatePool::new(pool1(&[0.6]), pool1(&[0.9])).unwrap();
        let d = select_mf_ucr(&m, &pools, &CostModel::new(1.0, 1.0).unwrap()).unwrap();
        assert_eq!(d.level, FidelityLevel::Low);
        // x* = 0.9 came from the high pool, so it snaps to the nearest low row
        assert_eq!(d.point, vec![0.6]);
    }

    #[test]
    fn mf_ucr_rule_arithmetic() {
        // far field: sd_eta = 2 (plus tiny nugget), sd_delta = 4; C_L = 1, C_H = 5 -> 2 >= 0.8
        let m = model(&[0.0], 2.0, &[0.0], 4.0);
        let pools = CandidatePool::new(pool1(&[0.9]), pool1(&[0.95])).unwrap();
        let d = select_mf_ucr(&m, &pools, &CostModel::new(1.0, 5.0).unwrap()).unwrap();
        assert_eq!(d.level, FidelityLevel::Low);
        let d = select_mf_ucr(&m, &pools, &CostModel::new(1.0, 1.5).unwrap()).unwrap();
        assert_eq!(d.level, FidelityLevel::High);
    }

    #[test]
    fn mf_ucr_exhausted_chosen_pool() {
        let m = model(&[0.0], 2.0, &[0.0], 0.1);
        let mut low = pool1(&[0.5]);
        low.consume(0);
        let pools = CandidatePool::new(low, pool1(&[0.95])).unwrap();
        let err = select_mf_ucr(&m, &pools, &CostModel::new(1.0, 2.0).unwrap()).unwrap_err();
        assert_eq!(err, Error::PoolExhausted(FidelityLevel::Low));
    }

    #[test]
    fn if_ucr_dominance_and_arithmetic() {
        let m = model(&[0.0], 2.0, &[0.0], 1.0);
        let pools = CandidatePool::new(pool1(&[0.3, 0.9]), pool1(&[0.5, 0.95])).unwrap();
        let d = select_if_ucr(&m, &pools, &CostModel::new(1.0, 1.0).unwrap()).unwrap();
        assert_eq!(d.level, FidelityLevel::Low);

        // sd_eta ~ 2 with C_L = 1 beats sd_delta ~ 4 with C_H = 5
        let m = model(&[0.0], 2.0, &[0.0], 4.0);
        let d = select_if_ucr(&m, &pools, &CostModel::new(1.0, 5.0).unwrap()).unwrap();
        assert_eq!(d.level, FidelityLevel::Low);
        assert!((d.score - libm::sqrt(4.0001)).abs() < 1e-3);
    }

    #[test]
    fn bel_distant_candidate_scores_zero() {
        // a believer that cannot change the variance leaves a zero reduction
        let m = model(&[0.0], 1.0, &[0.0], 1.0);
        let x = [0.4];
        let far = m.believer_variance(&x, &[50.0], FidelityLevel::Low);
        assert!((libm::sqrt(far) - m.predict(&x).sd_total()).abs() < 1e-9);
    }

    #[test]
    fn bel_equal_scores_pick_first_low() {
        // constant kernel: every candidate of every level gets the same score
        let gp = CondensedGP::new(
            TrainingSet::new(1, vec![0.0], vec![0.0]).unwrap(),
            Hyperparameters::isotropic(1.0, 0.0, 0.0, 1).unwrap(),
        )
        .unwrap()
        .with_mode(crate::gp::NuggetMode::Interpolating);
        let m = MultiFidelityModel::from_parts(gp.clone(), gp, OutputScaling::IDENTITY).unwrap();
        let pools = CandidatePool::new(pool1(&[0.3, 0.6]), pool1(&[0.1])).unwrap();
        let d = select_if_ucr_bel(&m, &pools, &CostModel::new(1.0, 1.0).unwrap()).unwrap();
        assert_eq!((d.level, d.index), (FidelityLevel::Low, 0));
    }

    #[test]
    fn empty_pools_rejected() {
        let m = model(&[0.0], 1.0, &[0.0], 1.0);
        let pools = CandidatePool::new(pool1(&[]), pool1(&[])).unwrap();
        let c = CostModel::new(1.0, 2.0).unwrap();
        assert!(select_if_ucr(&m, &pools, &c).is_err());
        assert!(select_if_ucr_bel(&m, &pools, &c).is_err());
        assert!(select_mf_ucr(&m, &pools, &c).is_err());
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in [Strategy::MfUcr, Strategy::IfUcr, Strategy::IfUcrBel, Strategy::SingleUs] {
            assert_eq!(s.as_str().parse::<Strategy>().unwrap(), s);
        }
        assert!("ei".parse::<Strategy>().is_err());
    }

    proptest! {
        #[test]
        fn uniform_cost_scaling_keeps_decisions(
            lf in proptest::collection::vec(0.0f64..1.0, 2..5),
            hf in proptest::collection::vec(0.0f64..1.0, 1..3),
            low in proptest::collection::vec(0.0f64..1.0, 1..8),
            high in proptest::collection::vec(0.0f64..1.0, 1..8),
            ratio in 1.0f64..10.0,
            factor in prop_oneof![Just(2.0f64), Just(0.5), Just(8.0)],
        ) {
            let m = model(&lf, 1.3, &hf, 0.7);
            let pools = CandidatePool::new(pool1(&low), pool1(&high)).unwrap();
            let c1 = CostModel::new(1.0, ratio).unwrap();
            let c2 = CostModel::new(factor, ratio * factor).unwrap();
            for s in Strategy::MULTI_FIDELITY {
                let a = select(s, &m, &pools, &c1).unwrap();
                let b = select(s, &m, &pools, &c2).unwrap();
                prop_assert_eq!((a.level, a.index), (b.level, b.index));
            }
        }

        #[test]
        fn bel_scores_non_negative(
            lf in proptest::collection::vec(0.0f64..1.0, 2..5),
            hf in proptest::collection::vec(0.0f64..1.0, 1..3),
            x in 0.0f64..1.0,
        ) {
            let m = model(&lf, 1.0, &hf, 0.5);
            for level in [FidelityLevel::Low, FidelityLevel::High] {
                prop_assert!(believer_reduction(&m, &[x], level) >= 0.0);
            }
        }

        #[test]
        fn if_ucr_equal_costs_is_max_sd(
            lf in proptest::collection::vec(0.0f64..1.0, 2..5),
            hf in proptest::collection::vec(0.0f64..1.0, 1..3),
            low in proptest::collection::vec(0.0f64..1.0, 1..8),
            high in proptest::collection::vec(0.0f64..1.0, 1..8),
        ) {
            let m = model(&lf, 1.0, &hf, 0.9);
            let pools = CandidatePool::new(pool1(&low), pool1(&high)).unwrap();
            let d = select_if_ucr(&m, &pools, &CostModel::new(3.0, 3.0).unwrap()).unwrap();
            let best = low.iter().map(|x| m.predict(&[*x]).sd_eta())
                .chain(high.iter().map(|x| m.predict(&[*x]).sd_delta()))
                .fold(f64::NEG_INFINITY, f64::max);
            prop_assert!((d.score * 3.0 - best).abs() < 1e-12);
        }
    }
}
