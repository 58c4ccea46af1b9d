//! Two-fidelity Kennedy-O'Hagan composition `y(x) = eta(x) + delta(x) + eps`.
//!
//! `eta` is a GP on the low-fidelity data, `delta` a GP on the residuals of the
//! high-fidelity observations with respect to `eta`'s predictive mean. The
//! noise term `eps` is carried by `delta`'s nugget. Both GPs are fitted in two
//! stages with independent chains and live in one shared standardized output
//! space, so their variances add and can be compared directly.

use alloc::vec::Vec;
use core::fmt;

use crate::gp::{CondensedGP, TrainingSet};
use crate::inference::{fit_gp, ChainConfig, PriorSpec};
use crate::linalg::Matrix;
use crate::scaling::OutputScaling;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FidelityLevel {
    Low,
    High,
}

impl FidelityLevel {
    pub fn as_str(self) -> &'static str {
        match self {
            FidelityLevel::Low => "low",
            FidelityLevel::High => "high",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "low" | "Low" | "LF" | "lf" => Some(FidelityLevel::Low),
            "high" | "High" | "HF" | "hf" => Some(FidelityLevel::High),
            _ => None,
        }
    }
}

impl fmt::Display for FidelityLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Prediction of the composed model, in raw output units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MfPrediction {
    pub mean: f64,
    pub var_total: f64,
    pub var_eta: f64,
    pub var_delta: f64,
}

impl MfPrediction {
    pub fn sd_total(&self) -> f64 {
        libm::sqrt(self.var_total)
    }

    pub fn sd_eta(&self) -> f64 {
        libm::sqrt(self.var_eta)
    }

    pub fn sd_delta(&self) -> f64 {
        libm::sqrt(self.var_delta)
    }
}

#[derive(Debug, Clone)]
pub struct MultiFidelityModel {
    eta: CondensedGP,
    delta: CondensedGP,
    scaling: OutputScaling,
}

/// Residual targets `y_i - mean_eta(x_i)` at the high-fidelity inputs, in standardized units.
pub fn discrepancy_set(eta: &CondensedGP, scaling: &OutputScaling, d_y: &TrainingSet) -> Result<TrainingSet> {
    if d_y.dim() != eta.dim() {
        return Err(Error::DimensionMismatch {
            expected: eta.dim(),
            got: d_y.dim(),
        });
    }
    let targets = d_y
        .points()
        .zip(d_y.outputs())
        .map(|(x, y)| scaling.standardize(*y) - eta.predict(x).mean)
        .collect();
    d_y.with_outputs(targets)
}

impl MultiFidelityModel {
    /// Fits `eta` on `d_eta`, then `delta` on the high-fidelity residuals.
    ///
    /// Outputs of both sets are standardized with one shared scaling (pooled mean
    /// and spread). `delta`'s chain uses `chain.seed + 1`.
    pub fn fit(d_eta: &TrainingSet, d_y: &TrainingSet, prior: &PriorSpec, chain: &ChainConfig) -> Result<Self> {
        if d_y.is_empty() {
            return Err(Error::invalid("high-fidelity set is empty; the discrepancy needs at least one point"));
        }
        if d_eta.len() < 2 {
            return Err(Error::invalid("low-fidelity set needs at least two points"));
        }
        if d_eta.dim() != d_y.dim() {
            return Err(Error::DimensionMismatch {
                expected: d_eta.dim(),
                got: d_y.dim(),
            });
        }
        let pooled: Vec<f64> = d_eta.outputs().iter().chain(d_y.outputs()).copied().collect();
        let scaling = OutputScaling::fit(&pooled);

        let w = d_eta.outputs().iter().map(|v| scaling.standardize(*v)).collect();
        let eta = fit_gp(d_eta.with_outputs(w)?, prior, chain)?;
        let residuals = discrepancy_set(&eta, &scaling, d_y)?;
        let delta = fit_gp(residuals, prior, &chain.with_seed(chain.seed.wrapping_add(1)))?;
        Ok(MultiFidelityModel { eta, delta, scaling })
    }

    /// Assembles a model from already-built GPs. `delta` is trained on the
    /// high-fidelity inputs; both work in the standardized space of `scaling`.
    pub fn from_parts(eta: CondensedGP, delta: CondensedGP, scaling: OutputScaling) -> Result<Self> {
        if eta.dim() != delta.dim() {
            return Err(Error::DimensionMismatch {
                expected: eta.dim(),
                got: delta.dim(),
            });
        }
        Ok(MultiFidelityModel { eta, delta, scaling })
    }

    pub fn eta(&self) -> &CondensedGP {
        &self.eta
    }

    pub fn delta(&self) -> &CondensedGP {
        &self.delta
    }

    pub fn scaling(&self) -> &OutputScaling {
        &self.scaling
    }

    pub fn dim(&self) -> usize {
        self.eta.dim()
    }

    pub fn n_low(&self) -> usize {
        self.eta.train().len()
    }

    pub fn n_high(&self) -> usize {
        self.delta.train().len()
    }

    pub fn predict(&self, x: &[f64]) -> MfPrediction {
        let e = self.eta.predict(x);
        let d = self.delta.predict(x);
        let var_eta = self.scaling.unstandardize_variance(e.variance);
        let var_delta = self.scaling.unstandardize_variance(d.variance);
        MfPrediction {
            mean: self.scaling.unstandardize(e.mean + d.mean),
            var_total: var_eta + var_delta,
            var_eta,
            var_delta,
        }
    }

    /// Total variance at `x_eval` after a hypothetical run at `x_bel` on `level`.
    ///
    /// Only the GP of that level is augmented (`eta` for low, `delta` for high);
    /// hyperparameters stay fixed and no output value is needed.
    pub fn believer_variance(&self, x_eval: &[f64], x_bel: &[f64], level: FidelityLevel) -> f64 {
        let (var_eta, var_delta) = match level {
            FidelityLevel::Low => (
                self.eta.variance_with_believer(x_eval, x_bel),
                self.delta.predict_variance(x_eval),
            ),
            FidelityLevel::High => (
                self.eta.predict_variance(x_eval),
                self.delta.variance_with_believer(x_eval, x_bel),
            ),
        };
        self.scaling.unstandardize_variance(var_eta) + self.scaling.unstandardize_variance(var_delta)
    }

    /// Block covariance over `(y at HF inputs, u at HF inputs, w at LF inputs)`:
    ///
    /// ```text
    /// [ K_y   0      0    ]
    /// [ 0     K_u    K_uw ]
    /// [ 0     K_uw'  K_w  ]
    /// ```
    ///
    /// `K_y` uses `delta`'s kernel, the other blocks `eta`'s. Diagonals carry the
    /// owning GP's nugget, cross blocks never do. Standardized units, no jitter.
    pub fn assemble_blocked(&self) -> Matrix {
        let hf = self.delta.train();
        let lf = self.eta.train();
        let (ny, ne) = (hf.len(), lf.len());
        let hd = self.delta.hyper();
        let he = self.eta.hyper();
        let n = 2 * ny + ne;
        let mut k = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = if i < ny {
                    block_entry(hd, hf.point(i), hf.point(j), i == j)
                } else if j < ny {
                    0.0
                } else {
                    let a = if i < 2 * ny { hf.point(i - ny) } else { lf.point(i - 2 * ny) };
                    let b = if j < 2 * ny { hf.point(j - ny) } else { lf.point(j - 2 * ny) };
                    block_entry(he, a, b, i == j)
                };
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
        k
    }
}

fn block_entry(h: &crate::gp::Hyperparameters, a: &[f64], b: &[f64], diagonal: bool) -> f64 {
    let mut v = h.correlated(a, b);
    if diagonal {
        v += h.noise_variance();
    }
    v
}

/// A single GP on one fidelity with its own output standardization.
#[derive(Debug, Clone)]
pub struct SingleFidelityModel {
    gp: CondensedGP,
    scaling: OutputScaling,
}

impl SingleFidelityModel {
    pub fn fit(train: &TrainingSet, prior: &PriorSpec, chain: &ChainConfig) -> Result<Self> {
        let scaling = OutputScaling::fit(train.outputs());
        let z = train.outputs().iter().map(|v| scaling.standardize(*v)).collect();
        let gp = fit_gp(train.with_outputs(z)?, prior, chain)?;
        Ok(SingleFidelityModel { gp, scaling })
    }

    pub fn gp(&self) -> &CondensedGP {
        &self.gp
    }

    pub fn predict_mean(&self, x: &[f64]) -> f64 {
        self.scaling.unstandardize(self.gp.predict(x).mean)
    }

    pub fn predict_variance(&self, x: &[f64]) -> f64 {
        self.scaling.unstandardize_variance(self.gp.predict_variance(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::Hyperparameters;
    use crate::linalg::Cholesky;
    use alloc::vec;

    fn gp1(xs: &[f64], ys: &[f64], s: f64, b: f64, l: f64) -> CondensedGP {
        let train = TrainingSet::new(1, xs.to_vec(), ys.to_vec()).unwrap();
        CondensedGP::new(train, Hyperparameters::isotropic(s, b, l, 1).unwrap()).unwrap()
    }

    fn toy() -> MultiFidelityModel {
        MultiFidelityModel::from_parts(
            gp1(&[0.0, 0.4, 0.8], &[1.0, -0.5, 0.3], 1.2, 4.0, 0.05),
            gp1(&[0.2, 0.7], &[0.3, -0.1], 0.6, 2.0, 0.02),
            OutputScaling::IDENTITY,
        )
        .unwrap()
    }

    #[test]
    fn fit_rejects_empty_high_set() {
        let lf = TrainingSet::new(1, vec![0.0, 1.0], vec![0.0, 1.0]).unwrap();
        let err = MultiFidelityModel::fit(&lf, &TrainingSet::empty(1), &PriorSpec::default_for(1), &ChainConfig::default());
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn matching_outputs_give_zero_residuals() {
        let eta = gp1(&[0.0, 0.5, 1.0], &[0.2, -0.4, 1.0], 1.0, 3.0, 0.01);
        let xs = [0.25, 0.8];
        let ys: Vec<f64> = xs.iter().map(|x| eta.predict(&[*x]).mean).collect();
        let d_y = TrainingSet::new(1, xs.to_vec(), ys).unwrap();
        let r = discrepancy_set(&eta, &OutputScaling::IDENTITY, &d_y).unwrap();
        assert!(r.outputs().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn far_field_variance_is_sum_of_limits() {
        let m = toy();
        let p = m.predict(&[25.0]);
        let expect = (1.44 + 0.0025) + (0.36 + 0.0004);
        assert!((p.var_total - expect).abs() < 1e-6);
        assert_eq!(p.var_total, p.var_eta + p.var_delta);
    }

    #[test]
    fn zero_discrepancy_recovers_eta_mean() {
        let eta = gp1(&[0.0, 0.5, 1.0], &[0.2, -0.4, 1.0], 1.0, 3.0, 0.01);
        let delta = gp1(&[0.5], &[0.0], 1.0, 3.0, 1e-6);
        let m = MultiFidelityModel::from_parts(eta.clone(), delta, OutputScaling::IDENTITY).unwrap();
        assert!((m.predict(&[0.5]).mean - eta.predict(&[0.5]).mean).abs() < 1e-12);
    }

    #[test]
    fn blocked_layout() {
        let m = MultiFidelityModel::from_parts(
            gp1(&[0.1], &[1.0], 1.5, 2.0, 0.1),
            gp1(&[0.6], &[0.0], 0.7, 1.0, 0.2),
            OutputScaling::IDENTITY,
        )
        .unwrap();
        let k = m.assemble_blocked();
        assert_eq!((k.rows(), k.cols()), (3, 3));
        assert_eq!((k[(0, 1)], k[(0, 2)], k[(1, 0)], k[(2, 0)]), (0.0, 0.0, 0.0, 0.0));
        assert!(k.is_symmetric());
        assert!((k[(0, 0)] - (0.49 + 0.04)).abs() < 1e-15);
        assert!((k[(1, 1)] - (2.25 + 0.01)).abs() < 1e-15);
        assert!((k[(2, 2)] - (2.25 + 0.01)).abs() < 1e-15);
        assert!((k[(1, 2)] - 2.25 * libm::exp(-2.0 * 0.25)).abs() < 1e-15);
    }

    #[test]
    fn blocked_is_psd_after_jitter() {
        let mut k = toy().assemble_blocked();
        assert!(k.is_symmetric());
        k.add_to_diagonal(1e-10 * 1.44);
        assert!(Cholesky::factor(&k).is_ok());
    }

    #[test]
    fn believer_at_eval_point_low() {
        let m = MultiFidelityModel::from_parts(
            gp1(&[0.0, 1.0], &[1.0, 0.0], 1.0, 3.0, 0.0),
            gp1(&[0.3], &[0.1], 0.5, 2.0, 0.01),
            OutputScaling::IDENTITY,
        )
        .unwrap();
        let x = [0.5];
        let p = m.predict(&x);
        let bel = m.believer_variance(&x, &x, FidelityLevel::Low);
        assert!((bel - p.var_delta).abs() < 1e-8);
    }

    #[test]
    fn distant_believer_changes_nothing() {
        let m = toy();
        let x = [0.5];
        let p = m.predict(&x);
        for level in [FidelityLevel::Low, FidelityLevel::High] {
            let bel = m.believer_variance(&x, &[40.0], level);
            assert!((bel - p.var_total).abs() < 1e-6);
        }
    }

    #[test]
    fn believer_matches_rebuild_one_point() {
        let eta = gp1(&[0.0], &[0.7], 1.0, 2.0, 0.1);
        let delta = gp1(&[0.9], &[0.0], 0.5, 1.0, 0.1);
        let m = MultiFidelityModel::from_parts(eta.clone(), delta.clone(), OutputScaling::IDENTITY).unwrap();
        let bel = m.believer_variance(&[0.5], &[0.5], FidelityLevel::Low);
        let rebuilt = gp1(&[0.0, 0.5], &[0.7, 0.0], 1.0, 2.0, 0.1);
        let expect = rebuilt.predict_variance(&[0.5]) + delta.predict_variance(&[0.5]);
        assert!((bel - expect).abs() < 1e-8);
    }

    #[test]
    fn believer_touches_only_its_level() {
        let m = toy();
        let (x, b) = ([0.55], [0.6]);
        let p = m.predict(&x);
        let low = m.believer_variance(&x, &b, FidelityLevel::Low);
        let high = m.believer_variance(&x, &b, FidelityLevel::High);
        let eta_only = m.eta().variance_with_believer(&x, &b);
        let delta_only = m.delta().variance_with_believer(&x, &b);
        assert_eq!(low, eta_only + p.var_delta);
        assert_eq!(high, p.var_eta + delta_only);
        assert!(low <= p.var_total && high <= p.var_total);
    }

    #[test]
    fn fit_is_deterministic_and_sized() {
        let lf = TrainingSet::new(1, vec![0.05, 0.3, 0.6, 0.9], vec![-9.0, -8.0, -6.0, 2.0]).unwrap();
        let hf = TrainingSet::new(1, vec![0.2, 0.75], vec![-0.5, -4.0]).unwrap();
        let cfg = ChainConfig {
            length: 400,
            seed: 3,
            ..ChainConfig::default()
        };
        let a = MultiFidelityModel::fit(&lf, &hf, &PriorSpec::default_for(1), &cfg).unwrap();
        let b = MultiFidelityModel::fit(&lf, &hf, &PriorSpec::default_for(1), &cfg).unwrap();
        assert_eq!((a.n_low(), a.n_high()), (4, 2));
        assert_eq!(a.eta().hyper(), b.eta().hyper());
        assert_eq!(a.delta().hyper(), b.delta().hyper());
    }
}
