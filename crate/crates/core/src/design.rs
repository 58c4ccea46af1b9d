//! Space-filling and random point sets on a box.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

/// `n` points drawn uniformly from `[lower, upper]`, row-major.
///
/// Draws `u` in `[0, 1)` and maps `1 - u`, so coordinates never hit the lower
/// bound exactly (the Park domain is open at zero).
pub fn uniform<R: Rng + ?Sized>(rng: &mut R, n: usize, lower: &[f64], upper: &[f64]) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            lower
                .iter()
                .zip(upper)
                .map(|(l, u)| l + (1.0 - rng.random::<f64>()) * (u - l))
                .collect()
        })
        .collect()
}

/// Latin hypercube: each dimension is split into `n` strata, one point per
/// stratum, strata paired by independent random permutations.
pub fn latin_hypercube<R: Rng + ?Sized>(rng: &mut R, n: usize, lower: &[f64], upper: &[f64]) -> Vec<Vec<f64>> {
    let d = lower.len();
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(d);
    for k in 0..d {
        let mut strata: Vec<usize> = (0..n).collect();
        strata.shuffle(rng);
        columns.push(
            strata
                .into_iter()
                .map(|s| {
                    let t = (s as f64 + 1.0 - rng.random::<f64>()) / n as f64;
                    lower[k] + t * (upper[k] - lower[k])
                })
                .collect(),
        );
    }
    (0..n).map(|i| (0..d).map(|k| columns[k][i]).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_within_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pts = uniform(&mut rng, 500, &[0.0, -1.0], &[1.0, 1.0]);
        assert_eq!(pts.len(), 500);
        assert!(pts.iter().all(|p| p[0] > 0.0 && p[0] <= 1.0 && p[1] > -1.0 && p[1] <= 1.0));
    }

    #[test]
    fn lhs_one_point_per_stratum() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 17;
        let pts = latin_hypercube(&mut rng, n, &[0.0, 0.0, 0.0], &[1.0, 1.0, 1.0]);
        for k in 0..3 {
            let mut seen = alloc::vec![false; n];
            for p in &pts {
                let s = ((p[k] * n as f64).ceil() as usize).clamp(1, n) - 1;
                assert!(!seen[s]);
                seen[s] = true;
            }
        }
    }
}
