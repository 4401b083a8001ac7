//! Seeded sample streams and Monte Carlo estimators.
//!
//! Sample `i` of a check labelled `label` always draws from the ChaCha8
//! stream `i` keyed by `(seed, label)`, so results do not depend on the
//! number of worker threads. Reductions use [`pairwise_sum`] over the
//! sample-ordered vector.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::quad::pairwise_sum;

/// FNV-1a hash of a label, mixed into the experiment seed.
fn label_hash(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Independent generator for sample `index` of the check `label`.
pub fn stream(seed: u64, label: &str, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ label_hash(label));
    rng.set_stream(index);
    rng
}

/// Evaluate `f` on samples `0..n` and return the results in sample order.
pub fn map_samples<T, F>(seed: u64, label: &str, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> T + Sync,
{
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, label, i as u64);
            f(&mut rng, i)
        })
        .collect()
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

impl Estimate {
    pub fn from_samples(v: &[f64]) -> Estimate {
        let n = v.len();
        if n == 0 {
            return Estimate { mean: 0.0, stderr: 0.0, n };
        }
        let mean = pairwise_sum(v) / n as f64;
        if n == 1 {
            return Estimate { mean, stderr: 0.0, n };
        }
        let sq: Vec<f64> = v.iter().map(|x| (x - mean) * (x - mean)).collect();
        let var = pairwise_sum(&sq) / (n - 1) as f64;
        Estimate { mean, stderr: (var / n as f64).sqrt(), n }
    }

    /// `|mean - target|` in units of the standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = (self.mean - target).abs();
        if self.stderr == 0.0 {
            if d == 0.0 { 0.0 } else { f64::INFINITY }
        } else {
            d / self.stderr
        }
    }

    /// True when `target` lies within `k` standard errors of the mean.
    pub fn consistent_with(&self, target: f64, k: f64) -> bool {
        self.z_score(target) <= k
    }
}

/// Mean and standard error of the per-sample difference `a - b`.
pub fn paired(a: &[f64], b: &[f64]) -> Estimate {
    assert_eq!(a.len(), b.len());
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    Estimate::from_samples(&d)
}

/// Per-column estimates for rows of equal length.
pub fn column_estimates(rows: &[Vec<f64>]) -> Vec<Estimate> {
    let k = rows.first().map_or(0, |r| r.len());
    (0..k)
        .map(|j| {
            let col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
            Estimate::from_samples(&col)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: f64 = stream(7, "x", 3).gen();
        let b: f64 = stream(7, "x", 3).gen();
        let c: f64 = stream(7, "x", 4).gen();
        let d: f64 = stream(7, "y", 3).gen();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn estimate_of_constant_has_zero_stderr() {
        let e = Estimate::from_samples(&[2.0; 10]);
        assert_eq!(e.mean, 2.0);
        assert_eq!(e.stderr, 0.0);
        assert!(e.consistent_with(2.0, 3.0));
    }

    #[test]
    fn map_samples_is_ordered() {
        let v = map_samples(1, "ord", 50, |_, i| i);
        assert_eq!(v, (0..50).collect::<Vec<_>>());
    }
}
