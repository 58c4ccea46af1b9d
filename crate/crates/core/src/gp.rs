//! Single-fidelity Gaussian process with a squared-exponential kernel.
//!
//! The kernel is
//!
//! ```text
//! k(a, b) = sigma^2 * exp(-sum_k beta_k (a_k - b_k)^2) + [a and b are the same observation] * lambda^2
//! ```
//!
//! with one inverse length scale `beta_k` per input dimension. The nugget
//! `lambda^2` only enters the diagonal of the training covariance and, in the
//! default [`NuggetMode::Noisy`] mode, the prior variance at an unseen point.
//!
//! The mean function is fixed at zero. Callers standardize outputs first
//! (see [`crate::scaling`]).

use alloc::vec::Vec;

use crate::linalg::{dot, Cholesky, Matrix};
use crate::{Error, Result};

/// Smallest diagonal jitter, relative to `sigma^2`.
pub const JITTER_START: f64 = 1e-10;
/// Largest diagonal jitter, relative to `sigma^2`.
pub const JITTER_MAX: f64 = 1e-4;

/// `theta = (sigma, beta, lambda)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperparameters {
    amplitude: f64,
    inv_length_scales: Vec<f64>,
    nugget: f64,
}

impl Hyperparameters {
    pub fn new(amplitude: f64, inv_length_scales: Vec<f64>, nugget: f64) -> Result<Self> {
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(Error::invalid("amplitude must be positive and finite"));
        }
        if inv_length_scales.is_empty() {
            return Err(Error::invalid("at least one inverse length scale is required"));
        }
        if inv_length_scales.iter().any(|b| !(*b >= 0.0 && b.is_finite())) {
            return Err(Error::invalid("inverse length scales must be non-negative and finite"));
        }
        if !(nugget >= 0.0 && nugget.is_finite()) {
            return Err(Error::invalid("nugget must be non-negative and finite"));
        }
        Ok(Hyperparameters {
            amplitude,
            inv_length_scales,
            nugget,
        })
    }

    /// Same inverse length scale in every dimension.
    pub fn isotropic(amplitude: f64, inv_length_scale: f64, nugget: f64, dim: usize) -> Result<Self> {
        Self::new(amplitude, alloc::vec![inv_length_scale; dim], nugget)
    }

    /// Inverse of [`Hyperparameters::to_log`]. Layout: `[ln sigma, ln beta_1.., ln lambda]`.
    pub fn from_log(log_params: &[f64]) -> Result<Self> {
        if log_params.len() < 3 {
            return Err(Error::invalid("log-parameter vector needs at least 3 entries"));
        }
        let p = log_params.len();
        Self::new(
            libm::exp(log_params[0]),
            log_params[1..p - 1].iter().map(|v| libm::exp(*v)).collect(),
            libm::exp(log_params[p - 1]),
        )
    }

    pub fn to_log(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.inv_length_scales.len() + 2);
        out.push(libm::log(self.amplitude));
        out.extend(self.inv_length_scales.iter().map(|b| libm::log(*b)));
        out.push(libm::log(self.nugget));
        out
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn inv_length_scales(&self) -> &[f64] {
        &self.inv_length_scales
    }

    pub fn nugget(&self) -> f64 {
        self.nugget
    }

    pub fn dim(&self) -> usize {
        self.inv_length_scales.len()
    }

    /// `sigma^2`
    pub fn signal_variance(&self) -> f64 {
        self.amplitude * self.amplitude
    }

    /// `lambda^2`
    pub fn noise_variance(&self) -> f64 {
        self.nugget * self.nugget
    }

    /// Kernel without the nugget term and without dimension checks.
    #[inline]
    pub(crate) fn correlated(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut s = 0.0;
        for ((x, y), beta) in a.iter().zip(b).zip(&self.inv_length_scales) {
            let d = x - y;
            s += beta * d * d;
        }
        self.signal_variance() * libm::exp(-s)
    }
}

/// Paired inputs and outputs for one fidelity level. Inputs are stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    dim: usize,
    inputs: Vec<f64>,
    outputs: Vec<f64>,
}

impl TrainingSet {
    pub fn new(dim: usize, inputs: Vec<f64>, outputs: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("input dimension must be at least 1"));
        }
        if inputs.len() != outputs.len() * dim {
            return Err(Error::invalid(alloc::format!(
                "{} input values do not form {} rows of dimension {}",
                inputs.len(),
                outputs.len(),
                dim
            )));
        }
        Ok(TrainingSet {
            dim,
            inputs,
            outputs,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R], outputs: Vec<f64>) -> Result<Self> {
        let dim = rows.first().map(|r| r.as_ref().len()).unwrap_or(1);
        if rows.len() != outputs.len() {
            return Err(Error::invalid("row count differs from output count"));
        }
        let mut inputs = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: r.len(),
                });
            }
            inputs.extend_from_slice(r);
        }
        Self::new(dim, inputs, outputs)
    }

    pub fn empty(dim: usize) -> Self {
        TrainingSet {
            dim,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn push(&mut self, point: &[f64], output: f64) -> Result<()> {
        if point.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: point.len(),
            });
        }
        self.inputs.extend_from_slice(point);
        self.outputs.push(output);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.inputs.chunks_exact(self.dim)
    }

    pub fn outputs(&self) -> &[f64] {
        &self.outputs
    }

    /// Same inputs, new outputs.
    pub fn with_outputs(&self, outputs: Vec<f64>) -> Result<Self> {
        Self::new(self.dim, self.inputs.clone(), outputs)
    }
}

/// Kernel value between `a` and `b`. `same_point` adds `lambda^2` (diagonal entries only).
pub fn kernel_eval(a: &[f64], b: &[f64], hyper: &Hyperparameters, same_point: bool) -> Result<f64> {
    for v in [a, b] {
        if v.len() != hyper.dim() {
            return Err(Error::DimensionMismatch {
                expected: hyper.dim(),
                got: v.len(),
            });
        }
    }
    let mut k = hyper.correlated(a, b);
    if same_point {
        k += hyper.noise_variance();
    }
    Ok(k)
}

/// Training covariance without jitter. Assembled from the lower triangle so it is exactly symmetric.
pub fn covariance_matrix(train: &TrainingSet, hyper: &Hyperparameters) -> Matrix {
    let n = train.len();
    let mut k = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..i {
            let v = hyper.correlated(train.point(i), train.point(j));
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
        k[(i, i)] = hyper.signal_variance() + hyper.noise_variance();
    }
    k
}

/// A training covariance together with its Cholesky factor.
#[derive(Debug, Clone)]
pub struct FactoredCovariance {
    /// Covariance including the jitter that made it factorizable.
    pub matrix: Matrix,
    pub chol: Cholesky,
    /// Absolute jitter added to the diagonal.
    pub jitter: f64,
}

/// Builds the training covariance and factors it, escalating the diagonal
/// jitter from `1e-10 sigma^2` by factors of ten up to `1e-4 sigma^2`.
pub fn build_covariance(train: &TrainingSet, hyper: &Hyperparameters) -> Result<FactoredCovariance> {
    if train.is_empty() {
        return Err(Error::invalid("training set is empty"));
    }
    if train.dim() != hyper.dim() {
        return Err(Error::DimensionMismatch {
            expected: hyper.dim(),
            got: train.dim(),
        });
    }
    factor_with_jitter(covariance_matrix(train, hyper), hyper.signal_variance())
}

pub(crate) fn factor_with_jitter(base: Matrix, signal_variance: f64) -> Result<FactoredCovariance> {
    let max_diagonal = base.max_diagonal();
    let mut relative = JITTER_START;
    loop {
        let jitter = relative * signal_variance;
        let mut matrix = base.clone();
        matrix.add_to_diagonal(jitter);
        match Cholesky::factor(&matrix) {
            Ok(chol) => {
                return Ok(FactoredCovariance {
                    matrix,
                    chol,
                    jitter,
                })
            }
            Err(pivot) if relative * 10.0 > JITTER_MAX * (1.0 + 1e-9) => {
                return Err(Error::NotPositiveDefinite {
                    jitter,
                    pivot,
                    max_diagonal,
                })
            }
            Err(_) => relative *= 10.0,
        }
    }
}

/// Whether unseen points are treated as new noisy observations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NuggetMode {
    /// `k(x*, x*)` includes `lambda^2`.
    #[default]
    Noisy,
    /// `k(x*, x*)` excludes `lambda^2`.
    Interpolating,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub mean: f64,
    pub variance: f64,
}

/// A GP with a single ("condensed") hyperparameter vector and a cached factorization.
///
/// Immutable once built, so it can be shared between scoring threads.
#[derive(Debug, Clone)]
pub struct CondensedGP {
    hyper: Hyperparameters,
    train: TrainingSet,
    covariance: FactoredCovariance,
    alpha: Vec<f64>,
    mode: NuggetMode,
}

impl CondensedGP {
    pub fn new(train: TrainingSet, hyper: Hyperparameters) -> Result<Self> {
        let covariance = build_covariance(&train, &hyper)?;
        let alpha = covariance.chol.solve(train.outputs());
        Ok(CondensedGP {
            hyper,
            train,
            covariance,
            alpha,
            mode: NuggetMode::Noisy,
        })
    }

    pub fn with_mode(mut self, mode: NuggetMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn hyper(&self) -> &Hyperparameters {
        &self.hyper
    }

    pub fn train(&self) -> &TrainingSet {
        &self.train
    }

    pub fn mode(&self) -> NuggetMode {
        self.mode
    }

    pub fn dim(&self) -> usize {
        self.train.dim()
    }

    /// Jittered training covariance `K`.
    pub fn covariance(&self) -> &Matrix {
        &self.covariance.matrix
    }

    pub fn cholesky(&self) -> &Cholesky {
        &self.covariance.chol
    }

    pub fn jitter(&self) -> f64 {
        self.covariance.jitter
    }

    /// `K^-1 y`
    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// Variance far from all data: `sigma^2 (+ lambda^2 in noisy mode)`.
    pub fn prior_variance(&self) -> f64 {
        match self.mode {
            NuggetMode::Noisy => self.hyper.signal_variance() + self.hyper.noise_variance(),
            NuggetMode::Interpolating => self.hyper.signal_variance(),
        }
    }

    /// `k* = [k(x*, x_i)]_i`, never including the nugget.
    pub fn cross_covariance(&self, x: &[f64]) -> Vec<f64> {
        self.check_dim(x);
        self.train
            .points()
            .map(|xi| self.hyper.correlated(x, xi))
            .collect()
    }

    fn check_dim(&self, x: &[f64]) {
        assert_eq!(x.len(), self.dim(), "query point has the wrong dimension");
    }

    /// Panics if `x` has the wrong dimension.
    pub fn predict(&self, x: &[f64]) -> Prediction {
        let k_star = self.cross_covariance(x);
        let mean = dot(&k_star, &self.alpha);
        let v = self.covariance.chol.solve_lower(&k_star);
        let variance = (self.prior_variance() - dot(&v, &v)).max(0.0);
        Prediction { mean, variance }
    }

    pub fn predict_variance(&self, x: &[f64]) -> f64 {
        let k_star = self.cross_covariance(x);
        let v = self.covariance.chol.solve_lower(&k_star);
        (self.prior_variance() - dot(&v, &v)).max(0.0)
    }

    /// Predictive variance at `x_eval` after appending `x_bel` to the training inputs
    /// with the hyperparameters held fixed. No output value is needed.
    ///
    /// Uses the rank-one update
    /// `V'(x) = V(x) - c(x, b)^2 / (k(b, b) + lambda^2 + jitter - |L^-1 k_b|^2)`
    /// where `c(x, b) = k(x, b) - (L^-1 k_x) . (L^-1 k_b)` is the posterior covariance.
    pub fn variance_with_believer(&self, x_eval: &[f64], x_bel: &[f64]) -> f64 {
        let chol = &self.covariance.chol;
        let v_x = chol.solve_lower(&self.cross_covariance(x_eval));
        let v_b = chol.solve_lower(&self.cross_covariance(x_bel));
        let before = (self.prior_variance() - dot(&v_x, &v_x)).max(0.0);
        let cross = self.hyper.correlated(x_eval, x_bel) - dot(&v_x, &v_b);
        let new_diagonal = self.hyper.signal_variance() + self.hyper.noise_variance() + self.jitter();
        // the Schur complement is the new pivot of the augmented factorization
        let schur = (new_diagonal - dot(&v_b, &v_b)).max(self.jitter());
        (before - cross * cross / schur).max(0.0)
    }
}
