//! Analytic test problems and error metrics.
//!
//! * Forrester (1-D, `x` in `[0, 1]`): `f_H = (6x - 2)^2 sin(12x - 4)`,
//!   `f_L = 0.6 f_H + 10 (x - 0.5) - 7`.
//! * Park (4-D, `x` in `(0, 1]^4`): the tuning function of Park and its
//!   low-fidelity variant of Xiong et al.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

fn check_unit(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::OutOfDomain {
            value: x,
            lower: 0.0,
            upper: 1.0,
        })
    }
}

pub fn forrester_high(x: f64) -> Result<f64> {
    check_unit(x)?;
    let a = 6.0 * x - 2.0;
    Ok(a * a * libm::sin(12.0 * x - 4.0))
}

pub fn forrester_low(x: f64) -> Result<f64> {
    Ok(0.6 * forrester_high(x)? + 10.0 * (x - 0.5) - 7.0)
}

fn check_park(x: &[f64]) -> Result<()> {
    if x.len() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: x.len(),
        });
    }
    if x[0].is_nan() || x[0] <= 0.0 {
        return Err(Error::invalid("park functions need x1 > 0"));
    }
    x.iter().try_for_each(|v| check_unit(*v))
}

pub fn park_high(x: &[f64]) -> Result<f64> {
    check_park(x)?;
    let (x1, x2, x3, x4) = (x[0], x[1], x[2], x[3]);
    let root = libm::sqrt(1.0 + (x2 + x3 * x3) * x4 / (x1 * x1));
    Ok(0.5 * x1 * (root - 1.0) + (x1 + 3.0 * x4) * libm::exp(1.0 + libm::sin(x3)))
}

pub fn park_low(x: &[f64]) -> Result<f64> {
    let high = park_high(x)?;
    let (x1, x2, x3) = (x[0], x[1], x[2]);
    Ok((1.0 + libm::sin(x1) / 10.0) * high - 2.0 * x1 + x2 * x2 + x3 * x3 + 0.5)
}

/// Root mean squared error.
pub fn rmse(predictions: &[f64], truth: &[f64]) -> Result<f64> {
    if predictions.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            got: predictions.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::invalid("rmse of an empty set"));
    }
    let sse: f64 = predictions
        .iter()
        .zip(truth)
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok(libm::sqrt(sse / truth.len() as f64))
}

type Evaluator = fn(&[f64]) -> Result<f64>;

/// A two-fidelity analytic problem on a box domain.
#[derive(Debug, Clone, Copy)]
pub struct Problem {
    pub name: &'static str,
    pub dim: usize,
    pub lower: &'static [f64],
    pub upper: &'static [f64],
    eval_high: Evaluator,
    eval_low: Evaluator,
}

impl Problem {
    pub fn forrester() -> Self {
        Problem {
            name: "forrester",
            dim: 1,
            lower: &[0.0],
            upper: &[1.0],
            eval_high: |x| forrester_high(x[0]),
            eval_low: |x| forrester_low(x[0]),
        }
    }

    /// The open lower bound is kept open by the sampler (`x1 > 0`).
    pub fn park() -> Self {
        Problem {
            name: "park",
            dim: 4,
            lower: &[0.0; 4],
            upper: &[1.0; 4],
            eval_high: park_high,
            eval_low: park_low,
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "forrester" => Some(Self::forrester()),
            "park" => Some(Self::park()),
            _ => None,
        }
    }

    pub fn eval_high(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        (self.eval_high)(x)
    }

    pub fn eval_low(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        (self.eval_low)(x)
    }
}

/// One steady-state operating condition of a top-spray fluidized bed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluidizedBedRecord {
    /// Relative humidity, %.
    pub humidity: f64,
    /// Room temperature, °C.
    pub room_temperature: f64,
    /// Temperature of the air from the pump, °C.
    pub air_temperature: f64,
    /// Coating solution flow rate, g/min.
    pub flow_rate: f64,
    /// Atomization air pressure, bar.
    pub atomization_pressure: f64,
    /// Fluidization air velocity, m/s.
    pub fluidization_velocity: f64,
    /// Measured bed temperature, °C (high fidelity).
    pub t_experiment: f64,
    /// Simulated bed temperature, °C (low fidelity).
    pub t_model: f64,
}

impl FluidizedBedRecord {
    pub const COLUMNS: [&'static str; 8] = ["H_R", "T_R", "T_a", "R_f", "P_a", "V_f", "T_exp", "T_model"];

    pub fn inputs(&self) -> [f64; 6] {
        [
            self.humidity,
            self.room_temperature,
            self.air_temperature,
            self.flow_rate,
            self.atomization_pressure,
            self.fluidization_velocity,
        ]
    }

    /// Values in [`Self::COLUMNS`] order.
    pub fn to_row(&self) -> [f64; 8] {
        let i = self.inputs();
        [i[0], i[1], i[2], i[3], i[4], i[5], self.t_experiment, self.t_model]
    }

    pub fn from_row(r: [f64; 8]) -> Self {
        FluidizedBedRecord {
            humidity: r[0],
            room_temperature: r[1],
            air_temperature: r[2],
            flow_rate: r[3],
            atomization_pressure: r[4],
            fluidization_velocity: r[5],
            t_experiment: r[6],
            t_model: r[7],
        }
    }
}

/// SYNTHETIC stand-in for the 28 measured operating conditions.
///
/// Inputs are uniform over plausible operating ranges; the "experimental"
/// temperature is a fixed quadratic in the normalized inputs plus noise and the
/// "model" temperature adds a smooth bias. Not measured data.
pub fn synthetic_fluidized_bed(n: usize, seed: u64) -> Vec<FluidizedBedRecord> {
    const RANGES: [(f64, f64); 6] = [(20.0, 80.0), (15.0, 30.0), (40.0, 80.0), (5.0, 20.0), (1.0, 3.0), (1.0, 3.0)];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let z: [f64; 6] = core::array::from_fn(|_| rng.random::<f64>());
            let x: [f64; 6] = core::array::from_fn(|k| RANGES[k].0 + z[k] * (RANGES[k].1 - RANGES[k].0));
            let truth = 28.0 + 18.0 * z[2] + 4.0 * z[1] - 3.0 * z[0] - 9.0 * z[3] + 2.5 * z[5]
                - 1.5 * z[4]
                - 5.0 * z[3] * z[3]
                + 3.0 * z[2] * z[5]
                - 2.0 * z[0] * z[3];
            let noise: f64 = rng.sample(StandardNormal);
            let t_exp = truth + 0.3 * noise;
            let t_model = truth + 1.5 - 2.0 * z[3] + 1.0 * z[2] * z[2];
            FluidizedBedRecord {
                humidity: x[0],
                room_temperature: x[1],
                air_temperature: x[2],
                flow_rate: x[3],
                atomization_pressure: x[4],
                fluidization_velocity: x[5],
                t_experiment: t_exp,
                t_model,
            }
        })
        .collect()
}
