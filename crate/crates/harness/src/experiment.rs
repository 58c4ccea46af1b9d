//! Replicated sequential-design experiments.
//!
//! Each replication fits an initial model, then repeats
//! select, evaluate, consume, refit and records the holdout RMSE of the
//! refitted model. Cumulative cost counts acquisitions only.
//!
//! Randomness for replication `r` derives from `seed + r` through independent
//! ChaCha8 streams, so replications are reproducible in isolation and can run
//! in parallel.

use mfgp_core::acquisition::{select, select_uncertainty};
use mfgp_core::benchmarks::{rmse, synthetic_fluidized_bed, FluidizedBedRecord, Problem};
use mfgp_core::design;
use mfgp_core::scaling::InputScaling;
use mfgp_core::{
    CandidatePool, CostModel, Error, FidelityLevel, MultiFidelityModel, Pool, PriorSpec, SingleFidelityModel,
    Strategy, TrainingSet,
};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{DesignKind, ExperimentConfig, ProblemKind};
use crate::{fluidized, HarnessError};

const STREAM_DESIGN: u64 = 0;
const STREAM_POOLS: u64 = 1;
const STREAM_HOLDOUT: u64 = 2;
const STREAM_MCMC: u64 = 3;

/// Number of synthetic records generated when no data file is given.
pub const SYNTHETIC_RECORDS: usize = 28;

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub strategy: Strategy,
    pub cost_high: f64,
    pub cost_low: f64,
    pub replication: usize,
    /// Starts at 1.
    pub iteration: usize,
    pub level: FidelityLevel,
    pub point: Vec<f64>,
    pub rmse: f64,
    pub cumulative_cost: f64,
    pub pool_low_remaining: usize,
    pub pool_high_remaining: usize,
}

/// Why a replication ended before its iteration budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EarlyStop {
    /// No candidate was available at `iteration`.
    PoolExhausted {
        iteration: usize,
        level: Option<FidelityLevel>,
    },
    /// RMSE reached the configured threshold at `iteration`.
    Threshold { iteration: usize },
}

#[derive(Debug, Clone)]
pub struct Replication {
    pub index: usize,
    pub seed: u64,
    /// Record indices held out, for tabulated problems.
    pub holdout_indices: Option<Vec<usize>>,
    pub holdout_truth: Vec<f64>,
    pub initial_rmse: f64,
    /// Holdout predictions after each recorded iteration.
    pub predictions: Vec<Vec<f64>>,
    pub records: Vec<IterationRecord>,
    pub early_stop: Option<EarlyStop>,
    pub replay: Replay,
}

/// Everything needed to recompute a replication's fits and decisions.
#[derive(Debug, Clone)]
pub struct Replay {
    pub init_low: TrainingSet,
    pub init_high: TrainingSet,
    /// Before any consumption.
    pub pools: CandidatePool,
    /// One chain seed per fit, the initial fit first.
    pub fit_seeds: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    /// With every default filled in.
    pub config: ExperimentConfig,
    pub dim: usize,
    pub replications: Vec<Replication>,
}

impl ExperimentResult {
    pub fn records(&self) -> impl Iterator<Item = &IterationRecord> + '_ {
        self.replications.iter().flat_map(|r| r.records.iter())
    }
}

/// Ground truth for the two fidelities.
enum Oracle {
    Analytic(Problem),
    /// Values aligned with the rows of the low and high pools.
    Table { low: Vec<f64>, high: Vec<f64> },
}

struct Scenario {
    dim: usize,
    init_low: TrainingSet,
    init_high: TrainingSet,
    pools: CandidatePool,
    oracle: Oracle,
    holdout_x: Vec<Vec<f64>>,
    holdout_y: Vec<f64>,
    holdout_indices: Option<Vec<usize>>,
}

#[allow(clippy::large_enum_variant)]
enum Model {
    Multi(MultiFidelityModel),
    Single(SingleFidelityModel),
}

impl Model {
    fn predict_mean(&self, x: &[f64]) -> f64 {
        match self {
            Model::Multi(m) => m.predict(x).mean,
            Model::Single(m) => m.predict_mean(x),
        }
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

pub fn replication_seed(config: &ExperimentConfig, replication: usize) -> u64 {
    config.seed.wrapping_add(replication as u64)
}

/// Loads the configured table, or the synthetic stand-in when no file is set.
pub fn load_records(config: &ExperimentConfig) -> Result<Vec<FluidizedBedRecord>, HarnessError> {
    match &config.data_file {
        Some(path) => Ok(fluidized::load(path)?),
        None => Ok(synthetic_fluidized_bed(SYNTHETIC_RECORDS, config.synthetic_data_seed)),
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult, HarnessError> {
    config.validate()?;
    let config = config.resolved();
    let records = match config.problem {
        ProblemKind::FluidizedBed => Some(load_records(&config)?),
        _ => None,
    };
    let dim = match config.problem {
        ProblemKind::Forrester => 1,
        ProblemKind::Park => 4,
        ProblemKind::FluidizedBed => 6,
    };
    let prior = config.prior.to_prior(dim)?;
    let cost = config.cost_ratio.cost_model()?;
    let replications = (0..config.replications)
        .into_par_iter()
        .map(|r| {
            let scenario = match &records {
                Some(recs) => tabulated_scenario(&config, r, recs)?,
                None => analytic_scenario(&config, r)?,
            };
            run_replication(&config, r, scenario, &prior, &cost)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ExperimentResult {
        config,
        dim,
        replications,
    })
}

fn draw(kind: DesignKind, rng: &mut ChaCha8Rng, n: usize, p: &Problem) -> Vec<Vec<f64>> {
    match kind {
        DesignKind::Uniform => design::uniform(rng, n, p.lower, p.upper),
        DesignKind::LatinHypercube => design::latin_hypercube(rng, n, p.lower, p.upper),
    }
}

fn analytic_scenario(config: &ExperimentConfig, r: usize) -> Result<Scenario, HarnessError> {
    let problem = match config.problem {
        ProblemKind::Forrester => Problem::forrester(),
        ProblemKind::Park => Problem::park(),
        ProblemKind::FluidizedBed => unreachable!("tabulated problem"),
    };
    let seed = replication_seed(config, r);
    let dim = problem.dim;

    let mut rng = stream(seed, STREAM_DESIGN);
    let low_x = draw(config.design, &mut rng, config.n_init_low, &problem);
    let high_x = draw(config.design, &mut rng, config.n_init_high, &problem);
    let mut rng = stream(seed, STREAM_POOLS);
    let pool_low = design::uniform(&mut rng, config.pool_size, problem.lower, problem.upper);
    let pool_high = design::uniform(&mut rng, config.pool_size, problem.lower, problem.upper);
    let mut rng = stream(seed, STREAM_HOLDOUT);
    let holdout_x = design::uniform(&mut rng, config.holdout_size(), problem.lower, problem.upper);

    for (rows, what) in [
        (&low_x, "initial low-fidelity design"),
        (&high_x, "initial high-fidelity design"),
        (&pool_low, "low-fidelity pool"),
        (&pool_high, "high-fidelity pool"),
    ] {
        if rows.iter().any(|p| holdout_x.contains(p)) {
            return Err(HarnessError::HoldoutLeak(what));
        }
    }

    let low_y = low_x.iter().map(|x| problem.eval_low(x)).collect::<Result<Vec<_>, _>>()?;
    let high_y = high_x.iter().map(|x| problem.eval_high(x)).collect::<Result<Vec<_>, _>>()?;
    let holdout_y = holdout_x
        .iter()
        .map(|x| problem.eval_high(x))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Scenario {
        dim,
        init_low: TrainingSet::from_rows(&low_x, low_y)?,
        init_high: TrainingSet::from_rows(&high_x, high_y)?,
        pools: CandidatePool::new(Pool::from_rows(dim, &pool_low)?, Pool::from_rows(dim, &pool_high)?)?,
        oracle: Oracle::Analytic(problem),
        holdout_x,
        holdout_y,
        holdout_indices: None,
    })
}

/// Holdout, initial designs and pools are disjoint subsets of record indices.
/// Each pool holds every remaining record not already in its level's design.
fn tabulated_scenario(
    config: &ExperimentConfig,
    r: usize,
    records: &[FluidizedBedRecord],
) -> Result<Scenario, HarnessError> {
    let n = records.len();
    let needed = config.holdout_size() + config.n_init_low.max(config.n_init_high);
    if n < needed {
        return Err(HarnessError::Config(format!(
            "{n} records cannot supply a holdout of {} plus an initial design of {}",
            config.holdout_size(),
            config.n_init_low.max(config.n_init_high)
        )));
    }
    let dim = 6;
    let inputs: Vec<[f64; 6]> = records.iter().map(FluidizedBedRecord::inputs).collect();
    let scaling = InputScaling::from_rows(&inputs)?;
    let x: Vec<Vec<f64>> = inputs.iter().map(|row| scaling.normalize(row)).collect();
    let seed = replication_seed(config, r);

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut stream(seed, STREAM_HOLDOUT));
    let mut holdout: Vec<usize> = order[..config.holdout_size()].to_vec();
    holdout.sort_unstable();
    let mut rest: Vec<usize> = order[config.holdout_size()..].to_vec();
    rest.sort_unstable();

    let mut rng = stream(seed, STREAM_DESIGN);
    let mut pick = |k: usize| {
        let mut chosen: Vec<usize> = rest.choose_multiple(&mut rng, k).copied().collect();
        chosen.sort_unstable();
        chosen
    };
    let init_low = pick(config.n_init_low);
    let init_high = pick(config.n_init_high);
    let pool_low: Vec<usize> = rest.iter().copied().filter(|i| !init_low.contains(i)).collect();
    let pool_high: Vec<usize> = rest.iter().copied().filter(|i| !init_high.contains(i)).collect();

    let training = init_low.iter().chain(&init_high).chain(&pool_low).chain(&pool_high);
    if training.into_iter().any(|i| holdout.contains(i)) {
        return Err(HarnessError::HoldoutLeak("training records"));
    }

    let rows = |idx: &[usize]| idx.iter().map(|&i| x[i].clone()).collect::<Vec<_>>();
    let low_val = |idx: &[usize]| idx.iter().map(|&i| records[i].t_model).collect::<Vec<_>>();
    let high_val = |idx: &[usize]| idx.iter().map(|&i| records[i].t_experiment).collect::<Vec<_>>();
    Ok(Scenario {
        dim,
        init_low: TrainingSet::from_rows(&rows(&init_low), low_val(&init_low))?,
        init_high: TrainingSet::from_rows(&rows(&init_high), high_val(&init_high))?,
        pools: CandidatePool::new(
            Pool::from_rows(dim, &rows(&pool_low))?,
            Pool::from_rows(dim, &rows(&pool_high))?,
        )?,
        oracle: Oracle::Table {
            low: low_val(&pool_low),
            high: high_val(&pool_high),
        },
        holdout_x: rows(&holdout),
        holdout_y: high_val(&holdout),
        holdout_indices: Some(holdout),
    })
}

fn fit(
    config: &ExperimentConfig,
    low: &TrainingSet,
    high: &TrainingSet,
    prior: &PriorSpec,
    rng: &mut ChaCha8Rng,
    seeds: &mut Vec<u64>,
) -> Result<Model, HarnessError> {
    let seed = rng.random();
    seeds.push(seed);
    let chain = config.chain.to_chain_config(seed);
    Ok(match config.strategy {
        Strategy::SingleUs => Model::Single(SingleFidelityModel::fit(high, prior, &chain)?),
        _ => Model::Multi(MultiFidelityModel::fit(low, high, prior, &chain)?),
    })
}

fn holdout_predictions(model: &Model, scenario: &Scenario) -> Vec<f64> {
    scenario.holdout_x.iter().map(|x| model.predict_mean(x)).collect()
}

fn run_replication(
    config: &ExperimentConfig,
    r: usize,
    mut scenario: Scenario,
    prior: &PriorSpec,
    cost: &CostModel,
) -> Result<Replication, HarnessError> {
    let seed = replication_seed(config, r);
    let mut mcmc = stream(seed, STREAM_MCMC);
    let mut low = scenario.init_low.clone();
    let mut high = scenario.init_high.clone();
    let mut seeds = Vec::new();
    let replay_pools = scenario.pools.clone();
    let mut model = fit(config, &low, &high, prior, &mut mcmc, &mut seeds)?;
    let initial_rmse = rmse(&holdout_predictions(&model, &scenario), &scenario.holdout_y)?;

    let mut out = Replication {
        index: r,
        seed,
        holdout_indices: scenario.holdout_indices.clone(),
        holdout_truth: scenario.holdout_y.clone(),
        initial_rmse,
        predictions: Vec::new(),
        records: Vec::new(),
        early_stop: None,
        replay: Replay {
            init_low: low.clone(),
            init_high: high.clone(),
            pools: replay_pools,
            fit_seeds: Vec::new(),
        },
    };
    let mut spent = 0.0;
    for iteration in 1..=config.iterations() {
        let decision = match &model {
            Model::Single(m) => select_uncertainty(m.gp(), &scenario.pools.high),
            Model::Multi(m) => select(config.strategy, m, &scenario.pools, cost),
        };
        let decision = match decision {
            Ok(d) => d,
            Err(e) => {
                let level = match e {
                    Error::PoolExhausted(level) => Some(level),
                    _ if scenario.pools.low.remaining() + scenario.pools.high.remaining() == 0 => None,
                    _ if config.strategy == Strategy::SingleUs && scenario.pools.high.remaining() == 0 => {
                        Some(FidelityLevel::High)
                    }
                    other => return Err(other.into()),
                };
                log::warn!("replication {r}: no candidate left at iteration {iteration}; stopping");
                out.early_stop = Some(EarlyStop::PoolExhausted { iteration, level });
                break;
            }
        };

        let value = match &scenario.oracle {
            Oracle::Analytic(p) => match decision.level {
                FidelityLevel::Low => p.eval_low(&decision.point)?,
                FidelityLevel::High => p.eval_high(&decision.point)?,
            },
            Oracle::Table { low, high } => match decision.level {
                FidelityLevel::Low => low[decision.index],
                FidelityLevel::High => high[decision.index],
            },
        };
        scenario.pools.consume(&decision);
        match decision.level {
            FidelityLevel::Low => low.push(&decision.point, value)?,
            FidelityLevel::High => high.push(&decision.point, value)?,
        }
        spent += cost.cost_of(decision.level);

        model = fit(config, &low, &high, prior, &mut mcmc, &mut seeds)?;
        let predictions = holdout_predictions(&model, &scenario);
        let error = rmse(&predictions, &scenario.holdout_y)?;
        out.records.push(IterationRecord {
            strategy: config.strategy,
            cost_high: cost.cost_high(),
            cost_low: cost.cost_low(),
            replication: r,
            iteration,
            level: decision.level,
            point: decision.point,
            rmse: error,
            cumulative_cost: spent,
            pool_low_remaining: scenario.pools.low.remaining(),
            pool_high_remaining: scenario.pools.high.remaining(),
        });
        out.predictions.push(predictions);
        log::debug!("replication {r} iteration {iteration}: {} rmse {error}", decision.level);

        if config.rmse_threshold.is_some_and(|t| error <= t) {
            out.early_stop = Some(EarlyStop::Threshold { iteration });
            break;
        }
    }
    debug_assert_eq!(scenario.dim, low.dim());
    out.replay.fit_seeds = seeds;
    Ok(out)
}
