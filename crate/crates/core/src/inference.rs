//! Hyperparameter inference by random-walk Metropolis.
//!
//! Sampling happens in log space, `[ln sigma, ln beta_1, .., ln beta_d, ln lambda]`,
//! with independent priors on each coordinate. A short adaptation phase tunes a
//! global step multiplier toward 25-40% acceptance; the multiplier is then frozen
//! and the recorded chain is a plain Metropolis chain. After discarding the
//! burn-in, the chain is condensed to its coordinate-wise median.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::gp::{build_covariance, CondensedGP, Hyperparameters, TrainingSet};
use crate::linalg::dot;
use crate::stats::median;
use crate::{Error, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_5;
const ADAPT_BATCH: usize = 50;
const TARGET_ACCEPT: (f64, f64) = (0.25, 0.40);

/// Prior on one log-parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LogPrior {
    /// Improper uniform prior; contributes zero.
    Flat,
    Normal { loc: f64, scale: f64 },
}

impl LogPrior {
    pub fn normal(loc: f64, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite() && loc.is_finite()) {
            return Err(Error::invalid("prior scale must be positive and finite"));
        }
        Ok(LogPrior::Normal { loc, scale })
    }

    pub fn log_density(&self, value: f64) -> f64 {
        match *self {
            LogPrior::Flat => 0.0,
            LogPrior::Normal { loc, scale } => {
                let z = (value - loc) / scale;
                -0.5 * z * z - libm::log(scale) - 0.5 * LN_2PI
            }
        }
    }

    fn location(&self) -> f64 {
        match *self {
            LogPrior::Flat => 0.0,
            LogPrior::Normal { loc, .. } => loc,
        }
    }

    fn width(&self) -> f64 {
        match *self {
            LogPrior::Flat => 1.0,
            LogPrior::Normal { scale, .. } => scale,
        }
    }
}

/// Independent priors on `ln sigma`, each `ln beta_k` and `ln lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorSpec {
    pub log_amplitude: LogPrior,
    pub log_inv_length_scales: Vec<LogPrior>,
    pub log_nugget: LogPrior,
}

impl PriorSpec {
    /// `ln sigma ~ N(0, 1)`, `ln beta_k ~ N(0, 1.5^2)`, `ln lambda ~ N(-3, 1)`.
    /// Meant for inputs on the unit cube and standardized outputs.
    pub fn default_for(dim: usize) -> Self {
        Self::uniform_dims(
            LogPrior::Normal { loc: 0.0, scale: 1.0 },
            LogPrior::Normal { loc: 0.0, scale: 1.5 },
            LogPrior::Normal { loc: -3.0, scale: 1.0 },
            dim,
        )
    }

    pub fn flat(dim: usize) -> Self {
        Self::uniform_dims(LogPrior::Flat, LogPrior::Flat, LogPrior::Flat, dim)
    }

    /// Same prior for every inverse length scale.
    pub fn uniform_dims(amplitude: LogPrior, inv_length: LogPrior, nugget: LogPrior, dim: usize) -> Self {
        PriorSpec {
            log_amplitude: amplitude,
            log_inv_length_scales: alloc::vec![inv_length; dim],
            log_nugget: nugget,
        }
    }

    pub fn dim(&self) -> usize {
        self.log_inv_length_scales.len()
    }

    /// Number of sampled parameters, `d + 2`.
    pub fn n_params(&self) -> usize {
        self.dim() + 2
    }

    fn terms(&self) -> impl Iterator<Item = &LogPrior> {
        core::iter::once(&self.log_amplitude)
            .chain(&self.log_inv_length_scales)
            .chain(core::iter::once(&self.log_nugget))
    }

    pub fn log_density(&self, log_params: &[f64]) -> f64 {
        self.terms()
            .zip(log_params)
            .map(|(p, v)| p.log_density(*v))
            .sum()
    }

    fn initial_point(&self) -> Vec<f64> {
        self.terms().map(LogPrior::location).collect()
    }

    fn widths(&self) -> Vec<f64> {
        self.terms().map(LogPrior::width).collect()
    }
}

/// Gaussian marginal log-likelihood of the zero-mean GP,
/// `-y'K^-1 y / 2 - log|K| / 2 - N log(2 pi) / 2`, or `-inf` if `K` cannot be factored.
pub fn log_likelihood(train: &TrainingSet, hyper: &Hyperparameters) -> f64 {
    match build_covariance(train, hyper) {
        Ok(cov) => {
            let z = cov.chol.solve_lower(train.outputs());
            -0.5 * dot(&z, &z) - 0.5 * cov.chol.log_det() - 0.5 * train.len() as f64 * LN_2PI
        }
        Err(_) => f64::NEG_INFINITY,
    }
}

/// Unnormalized log-posterior. Returns `-inf` (never an error) when the
/// covariance is singular so that a chain simply rejects the proposal.
pub fn log_posterior(train: &TrainingSet, hyper: &Hyperparameters, prior: &PriorSpec) -> f64 {
    let lp = prior.log_density(&hyper.to_log());
    if lp == f64::NEG_INFINITY {
        return lp;
    }
    lp + log_likelihood(train, hyper)
}

fn log_posterior_at(train: &TrainingSet, log_params: &[f64], prior: &PriorSpec) -> f64 {
    match Hyperparameters::from_log(log_params) {
        Ok(h) => log_posterior(train, &h, prior),
        Err(_) => f64::NEG_INFINITY,
    }
}

/// Metropolis acceptance probability for a symmetric proposal,
/// `min(1, exp(proposed - current))`. A `-inf` proposal is never accepted.
pub fn acceptance_probability(current: f64, proposed: f64) -> f64 {
    if proposed == f64::NEG_INFINITY || proposed.is_nan() {
        return 0.0;
    }
    if current == f64::NEG_INFINITY {
        return 1.0;
    }
    libm::exp(proposed - current).min(1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    /// Recorded samples, adaptation excluded.
    pub length: usize,
    pub burn_in: f64,
    /// Initial proposal scale, multiplied by each prior's width.
    pub step_scale: f64,
    pub adapt_steps: usize,
    pub seed: u64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            length: 2000,
            burn_in: 0.5,
            step_scale: 0.3,
            adapt_steps: 500,
            seed: 0,
        }
    }
}

impl ChainConfig {
    pub fn with_seed(&self, seed: u64) -> Self {
        ChainConfig {
            seed,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.length < 100 {
            return Err(Error::invalid("chain length must be at least 100"));
        }
        if !(0.2..=0.5).contains(&self.burn_in) {
            return Err(Error::invalid("burn-in fraction must lie in [0.2, 0.5]"));
        }
        if !(self.step_scale > 0.0 && self.step_scale.is_finite()) {
            return Err(Error::invalid("step scale must be positive"));
        }
        Ok(())
    }
}

/// Samples in log space, one row per step.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    n_params: usize,
    samples: Vec<f64>,
    accept_count: usize,
    burn_in_fraction: f64,
    step_scales: Vec<f64>,
}

impl Chain {
    pub fn from_samples<R: AsRef<[f64]>>(rows: &[R], accept_count: usize, burn_in_fraction: f64) -> Result<Self> {
        let n_params = rows
            .first()
            .ok_or_else(|| Error::invalid("a chain needs at least one sample"))?
            .as_ref()
            .len();
        if accept_count > rows.len() {
            return Err(Error::invalid("accept count exceeds the number of samples"));
        }
        if !(0.0..1.0).contains(&burn_in_fraction) {
            return Err(Error::invalid("burn-in fraction must lie in [0, 1)"));
        }
        let mut samples = Vec::with_capacity(rows.len() * n_params);
        for r in rows {
            if r.as_ref().len() != n_params {
                return Err(Error::DimensionMismatch {
                    expected: n_params,
                    got: r.as_ref().len(),
                });
            }
            samples.extend_from_slice(r.as_ref());
        }
        Ok(Chain {
            n_params,
            samples,
            accept_count,
            burn_in_fraction,
            step_scales: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len() / self.n_params
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn accept_count(&self) -> usize {
        self.accept_count
    }

    pub fn acceptance_rate(&self) -> f64 {
        self.accept_count as f64 / self.len() as f64
    }

    pub fn burn_in_fraction(&self) -> f64 {
        self.burn_in_fraction
    }

    /// Frozen per-coordinate proposal scales used for the recorded chain.
    pub fn step_scales(&self) -> &[f64] {
        &self.step_scales
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        &self.samples[i * self.n_params..(i + 1) * self.n_params]
    }

    /// Post-burn-in samples. Always keeps at least the last one.
    pub fn retained(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        let m = self.len();
        let skip = ((m as f64 * self.burn_in_fraction) as usize).min(m - 1);
        self.samples[skip * self.n_params..].chunks_exact(self.n_params)
    }

    /// Coordinate-wise median of the retained samples, in log space.
    pub fn log_median(&self) -> Vec<f64> {
        (0..self.n_params)
            .map(|k| {
                let column: Vec<f64> = self.retained().map(|s| s[k]).collect();
                median(&column)
            })
            .collect()
    }
}

/// Random-walk Metropolis over the log-hyperparameters. Deterministic for a fixed seed.
pub fn run_chain(train: &TrainingSet, prior: &PriorSpec, config: &ChainConfig) -> Result<Chain> {
    config.validate()?;
    if prior.dim() != train.dim() {
        return Err(Error::DimensionMismatch {
            expected: train.dim(),
            got: prior.dim(),
        });
    }
    if train.is_empty() {
        return Err(Error::invalid("training set is empty"));
    }

    let p = prior.n_params();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let widths = prior.widths();
    let mut multiplier = config.step_scale;

    let mut current = prior.initial_point();
    let mut current_lp = log_posterior_at(train, &current, prior);
    let mut proposal = alloc::vec![0.0; p];

    let mut step = |current: &mut Vec<f64>, current_lp: &mut f64, multiplier: f64, rng: &mut ChaCha8Rng| {
        for k in 0..p {
            let z: f64 = rng.sample(StandardNormal);
            proposal[k] = current[k] + multiplier * widths[k] * z;
        }
        let proposed_lp = log_posterior_at(train, &proposal, prior);
        let u: f64 = rng.random();
        if u < acceptance_probability(*current_lp, proposed_lp) {
            current.copy_from_slice(&proposal);
            *current_lp = proposed_lp;
            true
        } else {
            false
        }
    };

    for _ in 0..config.adapt_steps / ADAPT_BATCH {
        let mut accepted = 0;
        for _ in 0..ADAPT_BATCH {
            accepted += step(&mut current, &mut current_lp, multiplier, &mut rng) as usize;
        }
        let rate = accepted as f64 / ADAPT_BATCH as f64;
        if rate < TARGET_ACCEPT.0 {
            multiplier *= 0.6;
        } else if rate > TARGET_ACCEPT.1 {
            multiplier *= 1.5;
        }
    }

    let mut samples = Vec::with_capacity(config.length * p);
    let mut accept_count = 0;
    for _ in 0..config.length {
        accept_count += step(&mut current, &mut current_lp, multiplier, &mut rng) as usize;
        samples.extend_from_slice(&current);
    }
    if accept_count == 0 {
        return Err(Error::ChainStuck {
            steps: config.length,
            step_scale: multiplier,
        });
    }
    Ok(Chain {
        n_params: p,
        samples,
        accept_count,
        burn_in_fraction: config.burn_in,
        step_scales: widths.iter().map(|w| w * multiplier).collect(),
    })
}

/// Coordinate-wise median of the post-burn-in chain, mapped back from log space.
pub fn condense(chain: &Chain) -> Result<Hyperparameters> {
    Hyperparameters::from_log(&chain.log_median())
}

/// `run_chain` + `condense` + factorization.
pub fn fit_gp(train: TrainingSet, prior: &PriorSpec, config: &ChainConfig) -> Result<CondensedGP> {
    let chain = run_chain(&train, prior, config)?;
    CondensedGP::new(train, condense(&chain)?)
}
