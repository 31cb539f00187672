//! Small numeric helpers shared by Monte Carlo code.

use crate::par;
use crate::rng::{RandomSeed, Rng};

/// Running sums for a mean / standard-error estimate.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MeanAccumulator {
    pub count: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl MeanAccumulator {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(&mut self, other: &MeanAccumulator) {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        let m = self.mean();
        ((self.sum_sq - n * m * m) / (n - 1.0)).max(0.0)
    }

    pub fn stderr(&self) -> f64 {
        if self.count == 0 {
            return f64::NAN;
        }
        (self.variance() / self.count as f64).sqrt()
    }
}

impl FromIterator<f64> for MeanAccumulator {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = MeanAccumulator::default();
        for x in iter {
            acc.push(x);
        }
        acc
    }
}

/// Mean and standard error of `draw` over `samples` draws.
///
/// Samples are split into fixed batches; batch `b` uses `seed.derive(b)`. The
/// batch partials are merged in batch order, so the result is bit-identical
/// with or without the `parallel` feature.
pub fn monte_carlo_mean<F>(samples: u64, seed: RandomSeed, draw: F) -> MeanAccumulator
where
    F: Fn(&mut Rng) -> f64 + Sync + Send,
{
    const BATCH: u64 = 8192;
    let batches = samples.div_ceil(BATCH) as usize;
    let partials = par::map_indexed(batches, |b| {
        let mut rng = seed.derive(b as u64).rng();
        let start = b as u64 * BATCH;
        let len = BATCH.min(samples - start);
        let mut acc = MeanAccumulator::default();
        for _ in 0..len {
            acc.push(draw(&mut rng));
        }
        acc
    });
    let mut total = MeanAccumulator::default();
    for p in &partials {
        total.merge(p);
    }
    total
}

/// Linear-interpolated empirical quantile (`q ∈ [0, 1]`) of unsorted data.
pub fn quantile(data: &[f64], q: f64) -> f64 {
    if data.is_empty() {
        return f64::NAN;
    }
    let mut v = data.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    v[lo] * (1.0 - frac) + v[hi] * frac
}

/// Pool-adjacent-violators fit of a non-decreasing sequence (equal weights).
pub fn isotonic_non_decreasing(values: &[f64]) -> Vec<f64> {
    // blocks of (sum, count)
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(values.len());
    for &v in values {
        blocks.push((v, 1));
        while blocks.len() >= 2 {
            let (s2, c2) = blocks[blocks.len() - 1];
            let (s1, c1) = blocks[blocks.len() - 2];
            if s1 / c1 as f64 > s2 / c2 as f64 {
                blocks.pop();
                let last = blocks.len() - 1;
                blocks[last] = (s1 + s2, c1 + c2);
            } else {
                break;
            }
        }
    }
    blocks
        .into_iter()
        .flat_map(|(s, c)| std::iter::repeat_n(s / c as f64, c))
        .collect()
}

/// `ln(Σ exp(x_i))`, ignoring `-∞` terms; `-∞` for an empty or all-`-∞` input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + xs.iter().map(|&x| (x - max).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    #[test]
    fn accumulator_matches_direct_formulas() {
        let xs = [1.0, 2.0, 4.0, 7.0];
        let acc: MeanAccumulator = xs.iter().copied().collect();
        assert_eq!(acc.mean(), 3.5);
        let var = xs.iter().map(|x| (x - 3.5f64).powi(2)).sum::<f64>() / 3.0;
        assert!((acc.variance() - var).abs() < 1e-12);
    }

    #[test]
    fn monte_carlo_is_reproducible() {
        let a = monte_carlo_mean(20_000, RandomSeed(3), |r| r.random::<f64>());
        let b = monte_carlo_mean(20_000, RandomSeed(3), |r| r.random::<f64>());
        assert_eq!(a, b);
        assert_eq!(a.count, 20_000);
        assert!((a.mean() - 0.5).abs() < 4.0 * a.stderr());
    }

    #[test]
    fn isotonic_pools_violators() {
        assert_eq!(isotonic_non_decreasing(&[1.0, 3.0, 2.0, 4.0]), vec![1.0, 2.5, 2.5, 4.0]);
        assert_eq!(isotonic_non_decreasing(&[3.0, 2.0, 1.0]), vec![2.0, 2.0, 2.0]);
        assert_eq!(isotonic_non_decreasing(&[]), Vec::<f64>::new());
    }

    #[test]
    fn quantiles_and_logsumexp() {
        assert_eq!(quantile(&[3.0, 1.0, 2.0], 0.5), 2.0);
        assert_eq!(quantile(&[0.0, 10.0], 0.05), 0.5);
        assert!((log_sum_exp(&[0.0, 0.0]) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY]), f64::NEG_INFINITY);
    }
}
