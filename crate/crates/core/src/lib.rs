//! Multi-fidelity Gaussian-process surrogates with cost-aware adaptive sampling.
//!
//! The crate is `no_std` and only needs `alloc`. It contains everything numeric:
//!
//! - [`gp`]: squared-exponential kernel, jittered Cholesky factorization and
//!   predictive mean/variance of a single zero-mean GP.
//! - [`inference`]: random-walk Metropolis over the log-hyperparameter posterior,
//!   burn-in and median condensation.
//! - [`mf`]: the two-fidelity composition `y = eta + delta`, variance decomposition
//!   and the believer (hypothetical point) variance update.
//! - [`acquisition`]: uncertainty sampling and the three cost-aware selectors.
//! - [`benchmarks`]: Forrester and Park test functions, RMSE, a synthetic
//!   fluidized-bed table.
//! - [`design`]: uniform and Latin-hypercube point sets.
//!
//! File formats, the experiment loop and the CLI live in `mfgp-harness`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod acquisition;
pub mod benchmarks;
pub mod design;
mod error;
pub mod gp;
pub mod inference;
pub mod linalg;
pub mod mf;
pub mod scaling;
pub mod stats;

pub use acquisition::{CandidatePool, CostModel, Decision, Pool, Strategy};
pub use error::{Error, Result};
pub use gp::{CondensedGP, Hyperparameters, NuggetMode, Prediction, TrainingSet};
pub use inference::{Chain, ChainConfig, LogPrior, PriorSpec};
pub use mf::{FidelityLevel, MfPrediction, MultiFidelityModel, SingleFidelityModel};
