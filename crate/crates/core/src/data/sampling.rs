use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::DataError;

/// How sample indices are drawn.
#[derive(Debug, Clone, PartialEq)]
pub enum SamplingScheme {
    /// Every index with probability `1/n`.
    Uniform,
    /// Index `i` with probability `p_i`; the weights sum to one.
    Weighted(Vec<f64>),
}

impl SamplingScheme {
    /// Validates `weights` (all positive, summing to 1 within 1e-12).
    pub fn weighted(weights: Vec<f64>) -> Result<Self, DataError> {
        if weights.is_empty() {
            return Err(DataError::Empty);
        }
        if let Some(i) = weights.iter().position(|&p| !(p > 0.0 && p.is_finite())) {
            return Err(DataError::InvalidWeight { index: i });
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(DataError::WeightSum(total));
        }
        Ok(SamplingScheme::Weighted(weights))
    }

    /// Weights proportional to `scores` (e.g. per-sample smoothness constants).
    pub fn proportional_to(scores: &[f64]) -> Result<Self, DataError> {
        let total: f64 = scores.iter().sum();
        let mut weights: Vec<f64> = scores.iter().map(|s| s / total).collect();
        // absorb rounding so the sum check is exact to working precision
        let drift: f64 = 1.0 - weights.iter().sum::<f64>();
        if let Some(w) = weights.iter_mut().max_by(|a, b| a.total_cmp(b)) {
            *w += drift;
        }
        Self::weighted(weights)
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self, SamplingScheme::Uniform)
    }

    /// Probability of drawing index `i` out of `n`.
    pub fn probability(&self, i: usize, n: usize) -> f64 {
        match self {
            SamplingScheme::Uniform => 1.0 / n as f64,
            SamplingScheme::Weighted(w) => w[i],
        }
    }
}

/// A per-run stream of sample indices.
///
/// Built on a ChaCha counter-based generator: the stream depends only on the
/// recorded 64-bit seed and the number of draws, so two runs with the same
/// seed consume identical index sequences.
#[derive(Debug, Clone)]
pub struct IndexSampler {
    rng: ChaCha8Rng,
    seed: u64,
    n: usize,
    weighted: Option<WeightedIndex<f64>>,
    perm: Vec<usize>,
}

impl IndexSampler {
    pub fn new(seed: u64, scheme: &SamplingScheme, n: usize) -> Result<Self, DataError> {
        if n == 0 {
            return Err(DataError::Empty);
        }
        let weighted = match scheme {
            SamplingScheme::Uniform => None,
            SamplingScheme::Weighted(w) => {
                if w.len() != n {
                    return Err(DataError::LabelCount {
                        rows: n,
                        labels: w.len(),
                    });
                }
                Some(WeightedIndex::new(w).map_err(|_| DataError::WeightSum(w.iter().sum()))?)
            }
        };
        Ok(Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            seed,
            n,
            weighted,
            perm: Vec::new(),
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Draws one index in `[0, n)`.
    pub fn sample(&mut self) -> usize {
        match &self.weighted {
            Some(dist) => dist.sample(&mut self.rng),
            None => self.rng.random_range(0..self.n),
        }
    }

    /// Draws `b` distinct indices uniformly (partial Fisher–Yates).
    pub fn sample_batch(&mut self, b: usize) -> Result<Vec<usize>, DataError> {
        if b == 0 || b > self.n {
            return Err(DataError::BatchSize { b, n: self.n });
        }
        if self.perm.len() != self.n {
            self.perm = (0..self.n).collect();
        }
        let (chosen, _) = self.perm.partial_shuffle(&mut self.rng, b);
        Ok(chosen.to_vec())
    }

    /// Access to the underlying generator for auxiliary draws (initial points).
    pub fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}
