//! Independent oracles and convergence-rate calculators.
//!
//! Nothing here shares a code path with the solvers: gradients are checked
//! against central differences, optima come from dense direct solves, and
//! variances are computed by exhaustive enumeration.

mod verify;

pub use verify::{run_verification, CheckResult};

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::data::Dataset;
use crate::error::DiagnosticsError;
use crate::estimator::{delta_b, full_gradient, EstimatorState};
use crate::linalg;
use crate::model::Objective;

/// Largest `n` for which mini-batch variances are enumerated exactly.
pub const MAX_ENUMERATION_SAMPLES: usize = 12;

/// Central-difference gradient of `f` at `x` with step `h`.
pub fn finite_diff_grad<F>(f: F, x: &[f64], h: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|j| {
            let orig = probe[j];
            probe[j] = orig + h;
            let up = f(&probe);
            probe[j] = orig - h;
            let down = f(&probe);
            probe[j] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

fn dense_matrix(ds: &Dataset) -> DMatrix<f64> {
    let d = ds.n_features();
    let mut a = DMatrix::zeros(ds.n_samples(), d);
    for (i, row) in ds.rows().iter().enumerate() {
        for (j, v) in row.iter() {
            a[(i, j)] = v;
        }
    }
    a
}

/// Minimizer of `(1/2n)‖Ax − b‖² + (λ₁/2)‖x‖²`, i.e. the solution of
/// `(AᵀA/n + λ₁I)x = Aᵀb/n`.
pub fn ridge_closed_form(ds: &Dataset, l2: f64) -> Result<Vec<f64>, DiagnosticsError> {
    let n = ds.n_samples() as f64;
    let a = dense_matrix(ds);
    let b = DVector::from_column_slice(ds.labels());
    let d = ds.n_features();
    let gram = a.transpose() * &a / n + DMatrix::identity(d, d) * l2;
    let rhs = a.transpose() * b / n;
    let scale = gram.diagonal().max().max(f64::MIN_POSITIVE);
    let chol = gram.cholesky().ok_or(DiagnosticsError::Singular)?;
    // a pivot lost to rounding means the system is numerically singular
    if chol.l_dirty().diagonal().iter().any(|p| p * p <= 1e-13 * scale) {
        return Err(DiagnosticsError::Singular);
    }
    let x = chol.solve(&rhs);
    if x.iter().any(|v| !v.is_finite()) {
        return Err(DiagnosticsError::Singular);
    }
    Ok(x.iter().copied().collect())
}

/// Top of the spectrum of `C = (1/n) Σ a_i a_iᵀ`.
#[derive(Debug, Clone)]
pub struct LeadingEigen {
    pub value: f64,
    pub second: f64,
    pub vector: Vec<f64>,
}

impl LeadingEigen {
    /// `(λ₁ − λ₂)/λ₁`
    pub fn gap_ratio(&self) -> f64 {
        (self.value - self.second) / self.value
    }
}

/// Dense symmetric eigendecomposition of the sample covariance.
pub fn leading_eigen(ds: &Dataset) -> LeadingEigen {
    let a = dense_matrix(ds);
    let cov = a.transpose() * &a / ds.n_samples() as f64;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let top = order[0];
    LeadingEigen {
        value: eig.eigenvalues[top],
        second: order.get(1).map_or(0.0, |&k| eig.eigenvalues[k]),
        vector: eig.eigenvectors.column(top).iter().copied().collect(),
    }
}

/// `log₁₀(1 − ‖Aᵀx‖²/max_u ‖Aᵀu‖²)` for unit `x`; `−∞` once the ratio
/// reaches one.
pub fn eigen_relative_error(ds: &Dataset, x: &[f64], leading_value: f64) -> f64 {
    let n = ds.n_samples() as f64;
    let norm_sq = linalg::norm_sq(x);
    let rayleigh: f64 = ds.rows().iter().map(|r| r.dot(x).powi(2)).sum::<f64>() / n / norm_sq;
    let rel = (1.0 - rayleigh / leading_value).max(0.0);
    rel.log10()
}

/// Which averaging option the rate formula describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateOption {
    /// Snapshot averages all `m` iterates.
    I,
    /// Snapshot averages the first `m − 1` iterates.
    II,
}

/// Inputs and value of the geometric rate for strongly convex objectives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateReport {
    pub rho: f64,
    pub smoothness: f64,
    pub strong_convexity: f64,
    pub step: f64,
    pub epoch_length: usize,
    pub c: f64,
    pub option: RateOption,
}

impl RateReport {
    pub fn convergent(&self) -> bool {
        self.rho < 1.0
    }
}

/// The per-epoch contraction factor `ρ` for averaged-snapshot VR-SGD.
///
/// Option II: `2Lη(m+c)/((m−1)(1−3Lη)) + c(1−Lη)/(μη(m−1)(1−3Lη))`;
/// Option I replaces `m − 1` with `m`. `c` is the measured start/snapshot
/// gap ratio; `c = 0` evaluates the limit of the formula.
pub fn theoretical_rate_sc(
    smoothness: f64,
    strong_convexity: f64,
    step: f64,
    epoch_length: usize,
    c: f64,
    option: RateOption,
) -> Result<RateReport, DiagnosticsError> {
    let (l, mu, eta) = (smoothness, strong_convexity, step);
    for (name, v) in [("L", l), ("mu", mu), ("eta", eta)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(DiagnosticsError::Domain(format!("{name} must be positive, got {v}")));
        }
    }
    if !(c.is_finite() && c >= 0.0) {
        return Err(DiagnosticsError::Domain(format!("c must be non-negative, got {c}")));
    }
    if epoch_length < 2 {
        return Err(DiagnosticsError::Domain(format!(
            "m must be at least 2, got {epoch_length}"
        )));
    }
    let l_eta = l * eta;
    if l_eta >= 1.0 / 3.0 {
        return Err(DiagnosticsError::StepTooLarge(l_eta));
    }
    let m = epoch_length as f64;
    let denom_m = match option {
        RateOption::I => m,
        RateOption::II => m - 1.0,
    };
    let shrink = 1.0 - 3.0 * l_eta;
    let rho = 2.0 * l_eta * (m + c) / (denom_m * shrink) + c * (1.0 - l_eta) / (mu * eta * denom_m * shrink);
    Ok(RateReport {
        rho,
        smoothness: l,
        strong_convexity: mu,
        step: eta,
        epoch_length,
        c,
        option,
    })
}

/// One epoch's measured start/snapshot gap ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CEstimate {
    /// 1-based epoch index `s`.
    pub epoch: usize,
    /// `[F(x^s_0) − F*]/[F(x̃^{s−1}) − F*]`; `None` once the snapshot gap is zero.
    pub c: Option<f64>,
    /// `c / m`
    pub c_over_m: Option<f64>,
}

/// Measures `c_s` for every epoch from the objective values at the start
/// points `F(x^s_0)` and previous snapshots `F(x̃^{s−1})`.
pub fn assumption3_c_estimate(
    start_objectives: &[f64],
    prev_snapshot_objectives: &[f64],
    optimum: f64,
    epoch_length: usize,
) -> Vec<CEstimate> {
    start_objectives
        .iter()
        .zip(prev_snapshot_objectives)
        .enumerate()
        .map(|(k, (&start, &snap))| {
            let denom = snap - optimum;
            let c = (denom > 0.0).then(|| ((start - optimum) / denom).max(0.0));
            CEstimate {
                epoch: k + 1,
                c,
                c_over_m: c.map(|c| c / epoch_length as f64),
            }
        })
        .collect()
}

/// Exact variance of the (mini-batch) SVRG estimator against its bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceReport {
    /// `E‖estimate − ∇f(x)‖²` by enumeration of every batch.
    pub lhs: f64,
    /// `4L·δ(b)·[F(x) − F(x*) + F(x̃) − F(x*)]`
    pub rhs: f64,
    pub satisfied: bool,
}

/// Enumerates every index set of size `b` to get the exact estimator
/// variance at `x` with snapshot `x̃`, and compares it with the bound.
pub fn variance_bound_report(
    obj: &Objective,
    x: &[f64],
    snapshot: &[f64],
    optimum: &[f64],
    b: usize,
) -> Result<VarianceReport, DiagnosticsError> {
    let n = obj.n_samples();
    let delta = if n == 1 { 0.0 } else { delta_b(n, b)? };
    if b > 1 && n > MAX_ENUMERATION_SAMPLES {
        return Err(DiagnosticsError::TooLarge {
            n,
            max: MAX_ENUMERATION_SAMPLES,
        });
    }
    let state = EstimatorState::new(obj, snapshot.to_vec());
    let full = full_gradient(obj, x);

    let mut total = 0.0;
    let mut count = 0usize;
    let mut subset: Vec<usize> = (0..b).collect();
    loop {
        let est = state.minibatch_estimate(obj, &subset, x)?;
        total += linalg::dist(&est, &full).powi(2);
        count += 1;
        if !next_combination(&mut subset, n) {
            break;
        }
    }
    let lhs = total / count as f64;
    let f_opt = obj.objective_value(optimum);
    let gaps = obj.objective_value(x) - f_opt + obj.objective_value(snapshot) - f_opt;
    let rhs = 4.0 * obj.smoothness_constant() * delta * gaps;
    // rounding noise of the enumeration when both sides vanish
    let slack = 1e-14 * (1.0 + linalg::norm_sq(&full));
    Ok(VarianceReport {
        lhs,
        rhs,
        satisfied: lhs <= rhs + slack,
    })
}

/// Advances `subset` to the next `k`-combination of `0..n` in lexicographic
/// order; returns false after the last one.
fn next_combination(subset: &mut [usize], n: usize) -> bool {
    let k = subset.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if subset[i] < n - k + i {
            subset[i] += 1;
            for j in i + 1..k {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
