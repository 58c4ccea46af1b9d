//! Input normalization to the unit cube and output standardization.

use alloc::vec::Vec;

use crate::{Error, Result};

/// Affine output map `raw = offset + scale * standardized`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputScaling {
    pub offset: f64,
    pub scale: f64,
}

impl OutputScaling {
    pub const IDENTITY: OutputScaling = OutputScaling {
        offset: 0.0,
        scale: 1.0,
    };

    /// Mean and population standard deviation of `values`. A degenerate
    /// spread (one value, or all equal) keeps unit scale.
    pub fn fit(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self::IDENTITY;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let sd = libm::sqrt(var);
        let scale = if sd > 1e-12 * (1.0 + mean.abs()) { sd } else { 1.0 };
        OutputScaling {
            offset: mean,
            scale,
        }
    }

    pub fn standardize(&self, raw: f64) -> f64 {
        (raw - self.offset) / self.scale
    }

    pub fn unstandardize(&self, standardized: f64) -> f64 {
        self.offset + self.scale * standardized
    }

    /// Differences (residuals) only pick up the scale.
    pub fn standardize_difference(&self, raw_diff: f64) -> f64 {
        raw_diff / self.scale
    }

    pub fn unstandardize_variance(&self, variance: f64) -> f64 {
        variance * self.scale * self.scale
    }
}

/// Per-dimension min/max map onto `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputScaling {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl InputScaling {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::invalid("bounds must be non-empty and of equal length"));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l.is_finite() && u.is_finite() && l <= u)) {
            return Err(Error::invalid("bounds must be finite with lower <= upper"));
        }
        Ok(InputScaling { lower, upper })
    }

    /// Bounds taken from the data themselves.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| Error::invalid("cannot derive bounds from zero rows"))?
            .as_ref();
        let mut lower = first.to_vec();
        let mut upper = first.to_vec();
        for r in rows {
            let r = r.as_ref();
            if r.len() != lower.len() {
                return Err(Error::DimensionMismatch {
                    expected: lower.len(),
                    got: r.len(),
                });
            }
            for (k, v) in r.iter().enumerate() {
                lower[k] = lower[k].min(*v);
                upper[k] = upper[k].max(*v);
            }
        }
        Self::new(lower, upper)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    /// Constant dimensions map to 0.
    pub fn normalize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (l, u))| if u > l { (v - l) / (u - l) } else { 0.0 })
            .collect()
    }

    pub fn denormalize(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (l, u))| l + v * (u - l))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn output_round_trip() {
        let s = OutputScaling::fit(&[1.0, 3.0, 5.0]);
        assert!((s.offset - 3.0).abs() < 1e-15);
        let z = s.standardize(4.2);
        assert!((s.unstandardize(z) - 4.2).abs() < 1e-12);
    }

    #[test]
    fn degenerate_spread_keeps_unit_scale() {
        assert_eq!(OutputScaling::fit(&[2.0]).scale, 1.0);
        assert_eq!(OutputScaling::fit(&[2.0, 2.0]).scale, 1.0);
    }

    #[test]
    fn input_unit_cube() {
        let s = InputScaling::from_rows(&[vec![1.0, 10.0], vec![3.0, 10.0], vec![2.0, 10.0]]).unwrap();
        assert_eq!(s.normalize(&[2.0, 10.0]), vec![0.5, 0.0]);
        assert_eq!(s.denormalize(&[1.0, 0.0]), vec![3.0, 10.0]);
    }
}
