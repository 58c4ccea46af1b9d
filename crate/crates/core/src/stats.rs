//! Order statistics used for chain condensation and result summaries.

use alloc::vec::Vec;

/// Linear-interpolation quantile (the "type 7" definition) of already sorted data.
///
/// Panics on empty input.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let q = q.clamp(0.0, 1.0);
    let pos = q * (sorted.len() - 1) as f64;
    let lo = libm::floor(pos) as usize;
    let hi = libm::ceil(pos) as usize;
    let frac = pos - lo as f64;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

pub fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Median; even-length data average the two middle values.
pub fn median(values: &[f64]) -> f64 {
    quantile_sorted(&sorted(values), 0.5)
}

/// `(q25, q75)`.
pub fn quartiles(values: &[f64]) -> (f64, f64) {
    let s = sorted(values);
    (quantile_sorted(&s, 0.25), quantile_sorted(&s, 0.75))
}
