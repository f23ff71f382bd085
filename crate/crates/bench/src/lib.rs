//! Shared problem instances for the solver benchmarks.

use std::sync::Arc;

use vrsgd::{synthetic, LossKind, Objective, Regularizer};

/// Dense ℓ2-regularized least squares on normalized Gaussian rows.
pub fn dense_ridge(n: usize, d: usize) -> Objective {
    let ds = synthetic::ridge(n, d, 1).expect("valid sizes").normalize_rows();
    Objective::new(Arc::new(ds), LossKind::Squared, Regularizer::L2(1e-3)).expect("real labels")
}

/// Sparse ℓ2-regularized logistic regression, text-classification style.
pub fn sparse_logistic(n: usize, d: usize, density: f64) -> Objective {
    let ds = synthetic::sparse_classification(n, d, density, 2)
        .expect("valid sizes")
        .normalize_rows();
    Objective::new(Arc::new(ds), LossKind::Logistic, Regularizer::L2(1e-4)).expect("±1 labels")
}

/// `1/L` for the objective, with `L` covering the non-folded ℓ2 term too.
pub fn inverse_smoothness(obj: &Objective) -> f64 {
    1.0 / vrsgd::experiment::objective_smoothness(obj)
}
