//! Seeded synthetic instances used by tests, benchmarks and `gen-synth`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::Dataset;
use crate::error::DataError;

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Dense Gaussian rows with real targets `b = a·w + 0.1·noise`.
pub fn ridge(n: usize, d: usize, seed: u64) -> Result<Dataset, DataError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w: Vec<f64> = (0..d).map(|_| gaussian(&mut rng)).collect();
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let a: Vec<f64> = (0..d).map(|_| gaussian(&mut rng)).collect();
        let b = a.iter().zip(&w).map(|(x, y)| x * y).sum::<f64>() + 0.1 * gaussian(&mut rng);
        rows.push(a);
        labels.push(b);
    }
    Dataset::from_dense(rows, labels)
}

/// Dense Gaussian rows with `±1` labels from a noisy linear separator.
pub fn classification(n: usize, d: usize, seed: u64) -> Result<Dataset, DataError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w: Vec<f64> = (0..d).map(|_| gaussian(&mut rng)).collect();
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let a: Vec<f64> = (0..d).map(|_| gaussian(&mut rng)).collect();
        let z = a.iter().zip(&w).map(|(x, y)| x * y).sum::<f64>() + 0.5 * gaussian(&mut rng);
        rows.push(a);
        labels.push(if z >= 0.0 { 1.0 } else { -1.0 });
    }
    Dataset::from_dense(rows, labels)
}

/// Sparse rows with `max(1, round(density·d))` random nonzeros each and
/// `±1` labels, in the style of text-classification data.
pub fn sparse_classification(n: usize, d: usize, density: f64, seed: u64) -> Result<Dataset, DataError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = ((density * d as f64).round() as usize).clamp(1, d.max(1));
    let w: Vec<f64> = (0..d).map(|_| gaussian(&mut rng)).collect();
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let mut idx = rand::seq::index::sample(&mut rng, d, k).into_vec();
        idx.sort_unstable();
        let entries: Vec<(usize, f64)> = idx.into_iter().map(|j| (j, gaussian(&mut rng).abs() + 0.1)).collect();
        let z: f64 = entries.iter().map(|&(j, v)| w[j] * v).sum();
        rows.push(entries);
        labels.push(if z >= 0.0 { 1.0 } else { -1.0 });
    }
    Dataset::from_sparse(d, rows, labels)
}

/// Rows whose empirical covariance `(1/n) Σ a_i a_iᵀ` has exactly the given
/// eigenvalues (in a random orthonormal basis). Requires `n ≥ d`.
pub fn with_spectrum(n: usize, eigenvalues: &[f64], seed: u64) -> Result<Dataset, DataError> {
    let d = eigenvalues.len();
    if d == 0 {
        return Err(DataError::NoFeatures);
    }
    if n < d {
        return Err(DataError::DimensionTooSmall {
            requested: n,
            required: d,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis = DMatrix::from_fn(d, d, |_, _| gaussian(&mut rng)).qr().q();
    let scores = DMatrix::from_fn(n, d, |_, _| gaussian(&mut rng)).qr().q();
    let scale = (n as f64).sqrt();
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut a = vec![0.0; d];
        for (k, lambda) in eigenvalues.iter().enumerate() {
            let coef = scale * scores[(i, k)] * lambda.sqrt();
            for (j, aj) in a.iter_mut().enumerate() {
                *aj += coef * basis[(j, k)];
            }
        }
        rows.push(a);
    }
    Dataset::from_dense(rows, vec![1.0; n])
}
