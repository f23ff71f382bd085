//! Variance-reduced stochastic gradient estimators.
//!
//! All estimators rely on the linear-model structure of the components:
//! `∇f_i(x) − ∇f_i(x̃) = [ψ′(a_iᵀx) − ψ′(a_iᵀx̃)]·a_i + λ₁(x − x̃)`, so the
//! per-sample state is a single scalar.

use crate::error::DataError;
use crate::linalg;
use crate::model::Objective;

/// `∇f(x) = (1/n) Σ ∇f_i(x)`, one effective pass.
pub fn full_gradient(obj: &Objective, x: &[f64]) -> Vec<f64> {
    obj.smooth_gradient(x)
}

/// `δ(b) = (n − b)/((n − 1)b)`, the mini-batch variance factor.
pub fn delta_b(n: usize, b: usize) -> Result<f64, DataError> {
    if n < 2 {
        return Err(DataError::TooFewSamples { n, min: 2 });
    }
    if b == 0 || b > n {
        return Err(DataError::BatchSize { b, n });
    }
    Ok((n - b) as f64 / ((n - 1) * b) as f64)
}

/// Snapshot `x̃`, its full gradient `μ̃ = ∇f(x̃)`, and the cached
/// `ψ′(a_iᵀx̃)` for every sample.
#[derive(Debug, Clone)]
pub struct EstimatorState {
    snapshot: Vec<f64>,
    anchor_grad: Vec<f64>,
    snapshot_scalars: Vec<f64>,
}

impl EstimatorState {
    /// Computes the anchor gradient at `snapshot` (one pass over the data).
    pub fn new(obj: &Objective, snapshot: Vec<f64>) -> Self {
        let n = obj.n_samples();
        let data = obj.data();
        let snapshot_scalars: Vec<f64> = (0..n).map(|i| obj.component_scalar(i, &snapshot)).collect();
        let mut anchor_grad = vec![0.0; obj.dim()];
        for (i, &s) in snapshot_scalars.iter().enumerate() {
            data.row(i).axpy(s, &mut anchor_grad);
        }
        linalg::scale(1.0 / n as f64, &mut anchor_grad);
        let l2 = obj.folded_l2();
        if l2 > 0.0 {
            linalg::axpy(l2, &snapshot, &mut anchor_grad);
        }
        Self {
            snapshot,
            anchor_grad,
            snapshot_scalars,
        }
    }

    pub fn snapshot(&self) -> &[f64] {
        &self.snapshot
    }

    /// `μ̃`
    pub fn anchor_gradient(&self) -> &[f64] {
        &self.anchor_grad
    }

    /// `ψ′(a_iᵀx̃, b_i)`
    pub fn snapshot_scalar(&self, i: usize) -> f64 {
        self.snapshot_scalars[i]
    }

    /// `ψ′(a_iᵀx) − ψ′(a_iᵀx̃)`, the coefficient of `a_i` in the correction.
    pub fn correction_scalar(&self, obj: &Objective, i: usize, x: &[f64]) -> f64 {
        obj.component_scalar(i, x) - self.snapshot_scalars[i]
    }

    /// `∇f_i(x) − ∇f_i(x̃) + μ̃`
    pub fn svrg_estimate(&self, obj: &Objective, i: usize, x: &[f64]) -> Vec<f64> {
        let mut out = self.anchor_grad.clone();
        self.add_correction(obj, i, x, 1.0, &mut out);
        out
    }

    /// `out += weight·[∇f_i(x) − ∇f_i(x̃)]`
    pub fn add_correction(&self, obj: &Objective, i: usize, x: &[f64], weight: f64, out: &mut [f64]) {
        let coef = self.correction_scalar(obj, i, x);
        obj.data().row(i).axpy(weight * coef, out);
        let l2 = obj.folded_l2();
        if l2 > 0.0 {
            for ((o, xj), sj) in out.iter_mut().zip(x).zip(&self.snapshot) {
                *o += weight * l2 * (xj - sj);
            }
        }
    }

    /// `(1/b) Σ_{i∈I} [∇f_i(x) − ∇f_i(x̃)] + μ̃` for a set of distinct indices.
    pub fn minibatch_estimate(&self, obj: &Objective, batch: &[usize], x: &[f64]) -> Result<Vec<f64>, DataError> {
        let n = obj.n_samples();
        if batch.is_empty() || batch.len() > n {
            return Err(DataError::BatchSize { b: batch.len(), n });
        }
        let mut out = self.anchor_grad.clone();
        let w = 1.0 / batch.len() as f64;
        for &i in batch {
            self.add_correction(obj, i, x, w, &mut out);
        }
        Ok(out)
    }
}

/// SAGA's table of stored component derivatives and their running average.
#[derive(Debug, Clone)]
pub struct SagaState {
    table: Vec<f64>,
    average: Vec<f64>,
}

impl SagaState {
    /// Fills the table with `ψ′(a_iᵀx₀)` (one pass over the data).
    pub fn new(obj: &Objective, x0: &[f64]) -> Self {
        let n = obj.n_samples();
        let table: Vec<f64> = (0..n).map(|i| obj.component_scalar(i, x0)).collect();
        let mut average = vec![0.0; obj.dim()];
        for (i, &s) in table.iter().enumerate() {
            obj.data().row(i).axpy(s, &mut average);
        }
        linalg::scale(1.0 / n as f64, &mut average);
        Self { table, average }
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    /// `(1/n) Σ table_i · a_i`
    pub fn average(&self) -> &[f64] {
        &self.average
    }

    /// Returns `∇f_i(x) − g_i^old + average`, then stores the fresh entry for
    /// `i` and updates the average in O(nnz(a_i)).
    pub fn estimate_and_update(&mut self, obj: &Objective, i: usize, x: &[f64]) -> Vec<f64> {
        let fresh = obj.component_scalar(i, x);
        let delta = fresh - self.table[i];
        let row = obj.data().row(i);
        let mut out = self.average.clone();
        row.axpy(delta, &mut out);
        let l2 = obj.folded_l2();
        if l2 > 0.0 {
            linalg::axpy(l2, x, &mut out);
        }
        row.axpy(delta / obj.n_samples() as f64, &mut self.average);
        self.table[i] = fresh;
        out
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::data::{synthetic, Dataset};
    use crate::diagnostics::finite_diff_grad;
    use crate::model::{LossKind, Regularizer};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ridge(n: usize, d: usize, seed: u64) -> Objective {
        let ds = synthetic::ridge(n, d, seed).unwrap().normalize_rows();
        Objective::new(Arc::new(ds), LossKind::Squared, Regularizer::L2(1e-2))
            .unwrap()
            .with_folded_l2(true)
    }

    fn random_point(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
        (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    #[test]
    fn full_gradient_single_and_duplicate_samples() {
        let ds = Arc::new(Dataset::from_dense(vec![vec![0.3, -0.4]], vec![1.0]).unwrap());
        let obj = Objective::new(ds, LossKind::Logistic, Regularizer::None).unwrap();
        let x = [0.7, 0.2];
        assert_eq!(full_gradient(&obj, &x), obj.component_gradient(0, &x));

        let ds = Arc::new(Dataset::from_dense(vec![vec![0.3, -0.4], vec![0.3, -0.4]], vec![1.0, 1.0]).unwrap());
        let obj = Objective::new(ds, LossKind::Logistic, Regularizer::None).unwrap();
        assert_eq!(full_gradient(&obj, &x), obj.component_gradient(1, &x));
    }

    #[test]
    fn full_gradient_matches_finite_differences() {
        let ds = synthetic::classification(50, 6, 3).unwrap().normalize_rows();
        let obj = Objective::new(Arc::new(ds), LossKind::Logistic, Regularizer::None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_point(&mut rng, 6);
        let fd = finite_diff_grad(|p| obj.smooth_value(p), &x, 1e-6);
        let g = full_gradient(&obj, &x);
        for (a, b) in g.iter().zip(&fd) {
            assert!((a - b).abs() <= 1e-5);
        }
    }

    #[test]
    fn estimate_at_snapshot_is_anchor() {
        let obj = ridge(30, 4, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let snap = random_point(&mut rng, 4);
        let state = EstimatorState::new(&obj, snap.clone());
        for i in 0..30 {
            assert_eq!(state.svrg_estimate(&obj, i, &snap), state.anchor_gradient());
            assert_eq!(
                state.minibatch_estimate(&obj, &[i, (i + 1) % 30], &snap).unwrap(),
                state.anchor_gradient()
            );
        }
    }

    #[test]
    fn single_sample_is_exact_gradient() {
        let obj = ridge(1, 3, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let state = EstimatorState::new(&obj, random_point(&mut rng, 3));
        let x = random_point(&mut rng, 3);
        let est = state.svrg_estimate(&obj, 0, &x);
        let exact = obj.component_gradient(0, &x);
        for (a, b) in est.iter().zip(&exact) {
            assert!((a - b).abs() <= 1e-15 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn svrg_estimator_is_unbiased() {
        let obj = ridge(20, 5, 11);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let state = EstimatorState::new(&obj, random_point(&mut rng, 5));
            let x = random_point(&mut rng, 5);
            let mut mean = vec![0.0; 5];
            for i in 0..20 {
                linalg::axpy(1.0 / 20.0, &state.svrg_estimate(&obj, i, &x), &mut mean);
            }
            let full = full_gradient(&obj, &x);
            assert!(linalg::dist(&mean, &full) <= 1e-12 * linalg::norm(&full).max(1.0));
        }
    }

    #[test]
    fn minibatch_extremes() {
        let obj = ridge(12, 3, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let state = EstimatorState::new(&obj, random_point(&mut rng, 3));
        let x = random_point(&mut rng, 3);
        let all: Vec<usize> = (0..12).collect();
        let full = full_gradient(&obj, &x);
        let est = state.minibatch_estimate(&obj, &all, &x).unwrap();
        assert!(linalg::dist(&est, &full) <= 1e-14);
        for i in 0..12 {
            assert_eq!(
                state.minibatch_estimate(&obj, &[i], &x).unwrap(),
                state.svrg_estimate(&obj, i, &x)
            );
        }
        assert!(state.minibatch_estimate(&obj, &[], &x).is_err());
    }

    #[test]
    fn delta_values() {
        assert_eq!(delta_b(7, 1).unwrap(), 1.0);
        assert_eq!(delta_b(7, 7).unwrap(), 0.0);
        assert_eq!(delta_b(5, 2).unwrap(), 0.375);
        assert!(delta_b(1, 1).is_err());
        assert!(delta_b(5, 6).is_err());
    }

    #[test]
    fn saga_first_draw_returns_table_average() {
        let obj = ridge(10, 3, 8);
        let x = vec![0.2, -0.1, 0.4];
        let mut saga = SagaState::new(&obj, &x);
        let avg = saga.average().to_vec();
        let mut expected = avg.clone();
        linalg::axpy(obj.folded_l2(), &x, &mut expected);
        let est = saga.estimate_and_update(&obj, 3, &x);
        assert_eq!(est, expected);
        assert_eq!(saga.average(), avg.as_slice());
    }

    #[test]
    fn saga_single_sample() {
        let obj = ridge(1, 3, 8);
        let mut saga = SagaState::new(&obj, &[0.0; 3]);
        for x in [[0.5, 0.1, -0.3], [1.0, -1.0, 2.0]] {
            let est = saga.estimate_and_update(&obj, 0, &x);
            let exact = obj.component_gradient(0, &x);
            assert!(linalg::dist(&est, &exact) <= 1e-14);
        }
    }

    #[test]
    fn saga_mean_estimate_and_running_average() {
        let obj = ridge(10, 4, 21);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut saga = SagaState::new(&obj, &random_point(&mut rng, 4));
        // scramble the table by visiting a few points
        for _ in 0..25 {
            let i = rng.random_range(0..10);
            let p = random_point(&mut rng, 4);
            saga.estimate_and_update(&obj, i, &p);
        }
        // brute-force table simulation: stored gradient vectors g_i = t_i a_i
        let stored: Vec<Vec<f64>> = (0..10)
            .map(|i| {
                let mut g = vec![0.0; 4];
                obj.data().row(i).axpy(saga.table()[i], &mut g);
                g
            })
            .collect();
        let mut table_mean = vec![0.0; 4];
        for g in &stored {
            linalg::axpy(0.1, g, &mut table_mean);
        }
        assert!(linalg::dist(&table_mean, saga.average()) <= 1e-10);

        let x = random_point(&mut rng, 4);
        let mut mean = vec![0.0; 4];
        for i in 0..10 {
            let mut probe = saga.clone();
            let est = probe.estimate_and_update(&obj, i, &x);
            let mut direct = obj.component_gradient(i, &x);
            linalg::axpy(-1.0, &stored[i], &mut direct);
            linalg::axpy(1.0, &table_mean, &mut direct);
            assert!(linalg::dist(&est, &direct) <= 1e-12);
            linalg::axpy(0.1, &est, &mut mean);
        }
        assert!(linalg::dist(&mean, &full_gradient(&obj, &x)) <= 1e-12);
    }
}
