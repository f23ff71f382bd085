//! Optimization algorithms and their shared bookkeeping.

mod config;
mod deterministic;
mod eigen;
mod katyusha;
mod lazy;
mod momentum;
mod record;
mod saga;
mod svrg;

use std::time::{Duration, Instant};

pub use config::{
    Algorithm, Growth, KatyushaParams, LrMode, MomentumOption, SnapshotPolicy, SolverConfig, SparseMode, TraceLevel,
    UpdateRule,
};
pub use deterministic::{agd_momentum, apg_next_alpha, run_deterministic, DeterministicMethod};
pub use eigen::{run_eigen, EigenMethod};
pub use katyusha::{katyusha_w1, run_katyusha, KatyushaVariant};
pub use lazy::AffineTables;
pub use momentum::{momentum_weight, run_momentum_vr_sgd};
pub use record::{EpochEntry, RunRecord, RunStatus};
pub use saga::run_saga;
pub use svrg::{epoch_schedule, run_prox_svrg, run_svrg, run_vr_sgd, run_vr_sgd_pp};

use crate::data::SamplingScheme;
use crate::error::SolverError;
use crate::linalg;
use crate::model::Objective;

/// The guard trips when `F` exceeds this multiple of `max(|F(x̃⁰)|, 1)`.
pub const DIVERGENCE_FACTOR: f64 = 1e12;

/// `η_s = η₀ / max{α, 2/(s+1)}` for `s ≥ 1`.
pub fn learning_rate(s: usize, eta0: f64, alpha: f64) -> f64 {
    eta0 / alpha.max(2.0 / (s as f64 + 1.0))
}

/// Snapshot and next start point from an epoch's iterates `x_1..x_m`.
///
/// Panics on an empty epoch, or on a one-step epoch with the policy that
/// drops the last iterate.
pub fn snapshot_update(policy: SnapshotPolicy, iterates: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let m = iterates.len();
    assert!(m >= policy.min_epoch_length(), "epoch too short for {policy:?}");
    let last = iterates[m - 1].clone();
    let mean_of = |xs: &[Vec<f64>]| {
        let mut sum = vec![0.0; xs[0].len()];
        for x in xs {
            linalg::axpy(1.0, x, &mut sum);
        }
        linalg::scale(1.0 / xs.len() as f64, &mut sum);
        sum
    };
    match policy {
        SnapshotPolicy::Last => (last.clone(), last),
        SnapshotPolicy::Average => {
            let avg = mean_of(iterates);
            (avg.clone(), avg)
        }
        SnapshotPolicy::AverageThenLast => (mean_of(iterates), last),
        SnapshotPolicy::AverageExcludingLastThenLast => (mean_of(&iterates[..m - 1]), last),
    }
}

/// `x̃^S` if `F(x̃^S) ≤ F(mean)`, otherwise the mean of the snapshots.
pub fn final_output_select(last_snapshot: &[f64], snapshot_mean: &[f64], obj: &Objective) -> Vec<f64> {
    if obj.objective_value(last_snapshot) <= obj.objective_value(snapshot_mean) {
        last_snapshot.to_vec()
    } else {
        snapshot_mean.to_vec()
    }
}

/// Runs whichever algorithm the config names. Eigen solvers use only the
/// objective's dataset.
pub fn run(config: &SolverConfig, obj: &Objective) -> Result<RunRecord, SolverError> {
    match config.algorithm {
        Algorithm::VrSgd => run_vr_sgd(config, obj),
        Algorithm::MomentumVrSgd => run_momentum_vr_sgd(config, obj),
        Algorithm::VrSgdPlusPlus => run_vr_sgd_pp(config, obj),
        Algorithm::Svrg => run_svrg(config, obj),
        Algorithm::ProxSvrg => run_prox_svrg(config, obj),
        Algorithm::Saga => run_saga(config, obj),
        Algorithm::KatyushaI => run_katyusha(config, obj, KatyushaVariant::I),
        Algorithm::KatyushaII => run_katyusha(config, obj, KatyushaVariant::II),
        Algorithm::Gd => run_deterministic(config, obj, DeterministicMethod::Gd),
        Algorithm::Agd => run_deterministic(config, obj, DeterministicMethod::Agd),
        Algorithm::Apg => run_deterministic(config, obj, DeterministicMethod::Apg),
        Algorithm::Sgd => run_deterministic(config, obj, DeterministicMethod::Sgd),
        Algorithm::Power => run_eigen(config, obj.data(), EigenMethod::Power),
        Algorithm::VrPca => run_eigen(config, obj.data(), EigenMethod::VrPca),
        Algorithm::EigenVrSgd => run_eigen(config, obj.data(), EigenMethod::VrSgd),
    }
}

fn check_algorithm(config: &SolverConfig, allowed: &[Algorithm]) -> Result<(), SolverError> {
    if allowed.contains(&config.algorithm) {
        Ok(())
    } else {
        Err(SolverError::Config(format!(
            "this runner does not implement {}",
            config.algorithm.name()
        )))
    }
}

fn initial_point(config: &SolverConfig, d: usize) -> Vec<f64> {
    config.x0.clone().unwrap_or_else(|| vec![0.0; d])
}

/// `1/(n p_i)`, which keeps importance-sampled corrections unbiased.
fn correction_weight(scheme: &SamplingScheme, i: usize, n: usize) -> f64 {
    match scheme {
        SamplingScheme::Uniform => 1.0,
        SamplingScheme::Weighted(_) => 1.0 / (n as f64 * scheme.probability(i, n)),
    }
}

/// Clock, pass counter, divergence guard and trace rows of one run.
struct Tracker<'a> {
    obj: &'a Objective,
    start: Instant,
    excluded: Duration,
    passes: f64,
    threshold: f64,
    guard: bool,
    f_star: Option<f64>,
    initial_objective: f64,
    entries: Vec<EpochEntry>,
    status: RunStatus,
}

impl<'a> Tracker<'a> {
    fn new(obj: &'a Objective, config: &SolverConfig, x0: &[f64]) -> Self {
        let initial_objective = obj.objective_value(x0);
        Self {
            obj,
            start: Instant::now(),
            excluded: Duration::ZERO,
            passes: 0.0,
            threshold: DIVERGENCE_FACTOR * initial_objective.abs().max(1.0),
            guard: true,
            f_star: config.f_star,
            initial_objective,
            entries: Vec::with_capacity(config.epochs),
            status: RunStatus::Completed,
        }
    }

    fn without_guard(mut self) -> Self {
        self.guard = false;
        self
    }

    fn add_passes(&mut self, p: f64) {
        self.passes += p;
    }

    /// Appends the row for `epoch` at point `x`; false once the run diverged.
    fn record(&mut self, epoch: usize, x: &[f64]) -> bool {
        let wall = self.start.elapsed().saturating_sub(self.excluded);
        let eval_start = Instant::now();
        let objective = self.obj.objective_value(x);
        self.excluded += eval_start.elapsed();
        self.entries.push(EpochEntry {
            epoch,
            effective_passes: self.passes,
            wall_seconds: wall.as_secs_f64(),
            objective,
            gap: self.f_star.map(|f| objective - f),
        });
        if self.guard && !(objective.is_finite() && objective <= self.threshold) {
            self.status = RunStatus::Diverged { epoch };
            return false;
        }
        true
    }

    fn finish(self, config: &SolverConfig, parts: RunParts) -> RunRecord {
        let final_objective = self.obj.objective_value(&parts.final_x);
        RunRecord {
            config: config.clone(),
            initial_objective: self.initial_objective,
            entries: self.entries,
            epoch_lengths: parts.epoch_lengths,
            final_x: parts.final_x,
            final_objective,
            status: self.status,
            coordinate_updates: parts.coordinate_updates,
            used_lazy: parts.used_lazy,
            snapshots: parts.snapshots,
            start_points: parts.start_points,
            iterates: parts.iterates,
        }
    }
}

/// The algorithm-specific half of a [`RunRecord`].
#[derive(Default)]
struct RunParts {
    final_x: Vec<f64>,
    epoch_lengths: Vec<usize>,
    coordinate_updates: u64,
    used_lazy: bool,
    snapshots: Vec<Vec<f64>>,
    start_points: Vec<Vec<f64>>,
    iterates: Vec<Vec<f64>>,
}

/// Running mean of the snapshots for [`final_output_select`].
struct SnapshotMean {
    sum: Vec<f64>,
    count: usize,
}

impl SnapshotMean {
    fn new(d: usize) -> Self {
        Self {
            sum: vec![0.0; d],
            count: 0,
        }
    }

    fn push(&mut self, x: &[f64]) {
        linalg::axpy(1.0, x, &mut self.sum);
        self.count += 1;
    }

    fn mean(&self) -> Vec<f64> {
        let mut m = self.sum.clone();
        linalg::scale(1.0 / self.count as f64, &mut m);
        m
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::data::Dataset;
    use crate::model::{LossKind, Regularizer};

    #[test]
    fn learning_rate_examples() {
        assert!((learning_rate(1, 0.1, 0.2) - 0.1).abs() < 1e-15);
        assert!((learning_rate(9, 0.1, 0.2) - 0.5).abs() < 1e-15);
        assert!((learning_rate(1000, 0.1, 0.2) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn learning_rate_is_monotone_and_caps() {
        for &alpha in &[0.05, 0.2, 0.5, 1.0] {
            let mut prev = 0.0;
            for s in 1..500 {
                let eta = learning_rate(s, 0.3, alpha);
                assert!(eta >= prev);
                prev = eta;
                if s as f64 >= 2.0 / alpha - 1.0 {
                    assert!((eta - 0.3 / alpha).abs() <= 1e-15 * eta);
                }
            }
        }
    }

    #[test]
    fn snapshot_update_examples() {
        let c = vec![vec![1.5, -2.0]; 4];
        for p in [
            SnapshotPolicy::Last,
            SnapshotPolicy::Average,
            SnapshotPolicy::AverageThenLast,
            SnapshotPolicy::AverageExcludingLastThenLast,
        ] {
            let (snap, start) = snapshot_update(p, &c);
            assert_eq!(snap, c[0]);
            assert_eq!(start, c[0]);
        }
        let (snap, start) = snapshot_update(SnapshotPolicy::AverageThenLast, &[vec![0.0], vec![2.0]]);
        assert_eq!((snap, start), (vec![1.0], vec![2.0]));
        let (snap, start) = snapshot_update(
            SnapshotPolicy::AverageExcludingLastThenLast,
            &[vec![0.0], vec![0.0], vec![3.0]],
        );
        assert_eq!((snap, start), (vec![0.0], vec![3.0]));
        let (snap, start) = snapshot_update(SnapshotPolicy::Average, &[vec![0.0], vec![2.0]]);
        assert_eq!((snap, start), (vec![1.0], vec![1.0]));
        let (snap, start) = snapshot_update(SnapshotPolicy::Last, &[vec![0.0], vec![2.0]]);
        assert_eq!((snap, start), (vec![2.0], vec![2.0]));
    }

    fn quadratic() -> Objective {
        // F(x) = (x − 1)²/2 in one dimension
        let ds = Dataset::from_dense(vec![vec![1.0]], vec![1.0]).unwrap();
        Objective::new(Arc::new(ds), LossKind::Squared, Regularizer::None).unwrap()
    }

    #[test]
    fn final_output_prefers_better_point_and_breaks_ties_to_last() {
        let obj = quadratic();
        assert_eq!(final_output_select(&[3.0], &[3.0], &obj), vec![3.0]);
        // snapshots 0.5 and 2.0: mean 1.25 beats the last one
        assert_eq!(final_output_select(&[2.0], &[1.25], &obj), vec![1.25]);
        // snapshots symmetric about the optimum: last 0.0 and mean 2.0 tie
        assert_eq!(final_output_select(&[0.0], &[2.0], &obj), vec![0.0]);
    }
}
