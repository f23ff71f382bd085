//! The snapshot/anchor epoch engine behind VR-SGD, VR-SGD++, SVRG and
//! Prox-SVRG. The algorithms differ only in snapshot policy, epoch lengths
//! and how the output is chosen.

use crate::data::{IndexSampler, SamplingScheme};
use crate::error::SolverError;
use crate::estimator::EstimatorState;
use crate::linalg;
use crate::model::{Objective, Regularizer};
use crate::prox::ProxSpec;

use super::config::{Algorithm, SnapshotPolicy, SolverConfig, SparseMode, TraceLevel, UpdateRule};
use super::record::RunRecord;
use super::{check_algorithm, correction_weight, final_output_select, initial_point, lazy};
use super::{RunParts, SnapshotMean, Tracker};

/// VR-SGD: averaged snapshot, last-iterate restart, best-of output.
pub fn run_vr_sgd(config: &SolverConfig, obj: &Objective) -> Result<RunRecord, SolverError> {
    check_algorithm(config, &[Algorithm::VrSgd])?;
    let m = config.resolved_epoch_length(obj.n_samples());
    run_engine(config, obj, &vec![m; config.epochs], true)
}

/// VR-SGD with epoch lengths from [`epoch_schedule`].
pub fn run_vr_sgd_pp(config: &SolverConfig, obj: &Objective) -> Result<RunRecord, SolverError> {
    check_algorithm(config, &[Algorithm::VrSgdPlusPlus])?;
    config.validate(obj)?;
    let n = obj.n_samples();
    let lengths = epoch_schedule(
        config.growth_initial(n),
        config.resolved_epoch_length(n),
        config.growth.rho,
        config.epochs,
    );
    run_engine(config, obj, &lengths, true)
}

/// SVRG with the last iterate as snapshot; outputs `x̃^S`.
pub fn run_svrg(config: &SolverConfig, obj: &Objective) -> Result<RunRecord, SolverError> {
    check_algorithm(config, &[Algorithm::Svrg])?;
    let m = config.resolved_epoch_length(obj.n_samples());
    run_engine(config, obj, &vec![m; config.epochs], false)
}

/// Prox-SVRG: proximal steps, averaged snapshot and restart; outputs `x̃^S`.
pub fn run_prox_svrg(config: &SolverConfig, obj: &Objective) -> Result<RunRecord, SolverError> {
    check_algorithm(config, &[Algorithm::ProxSvrg])?;
    let m = config.resolved_epoch_length(obj.n_samples());
    run_engine(config, obj, &vec![m; config.epochs], false)
}

/// `m₁, m₂, …` with `m_{s+1} = min(⌊ρ m_s⌋, m)` while `m_s < m`, constant
/// afterwards. A step that would not grow (tiny `m_s`) adds one instead.
pub fn epoch_schedule(initial: usize, cap: usize, rho: f64, epochs: usize) -> Vec<usize> {
    let mut lengths = Vec::with_capacity(epochs);
    let mut m_s = initial;
    for _ in 0..epochs {
        lengths.push(m_s);
        if m_s < cap {
            let grown = (rho * m_s as f64).floor() as usize;
            m_s = grown.max(m_s + 1).min(cap);
        }
    }
    lengths
}

/// What one inner loop hands back.
pub(super) struct EpochOut {
    /// `x_m`
    pub last: Vec<f64>,
    /// `Σ_{k=1}^{m} x_k`
    pub sum: Vec<f64>,
}

/// Fixed per-run inputs of the inner loops.
pub(super) struct Inner<'a> {
    pub obj: &'a Objective,
    pub rule: UpdateRule,
    pub residual: Regularizer,
    pub batch: usize,
    pub scheme: &'a SamplingScheme,
    /// Project back to the unit sphere after every step.
    pub normalize: bool,
}

/// One inner step `x ← x − η(direction + ∇g(x))` or `x ← prox(x − η·direction)`.
pub(super) fn apply_step(rule: UpdateRule, residual: Regularizer, eta: f64, direction: &[f64], x: &mut [f64]) {
    match rule {
        UpdateRule::Smooth => {
            let l2 = residual.l2_weight();
            for (xj, dj) in x.iter_mut().zip(direction) {
                *xj -= eta * (dj + l2 * *xj);
            }
        }
        UpdateRule::Proximal => {
            let prox = ProxSpec::new(residual, eta).expect("validated positive step");
            for (xj, dj) in x.iter_mut().zip(direction) {
                *xj = prox.apply_scalar(*xj - eta * dj);
            }
        }
    }
}

/// Dense inner loop: every step touches all `d` coordinates.
pub(super) fn dense_epoch(
    inner: &Inner,
    state: &EstimatorState,
    start: Vec<f64>,
    m: usize,
    eta: f64,
    sampler: &mut IndexSampler,
    counter: &mut u64,
    mut iterates: Option<&mut Vec<Vec<f64>>>,
) -> Result<EpochOut, SolverError> {
    let obj = inner.obj;
    let n = obj.n_samples();
    let d = obj.dim();
    let mut x = start;
    let mut sum = vec![0.0; d];
    let mut est = vec![0.0; d];
    for _ in 0..m {
        est.copy_from_slice(state.anchor_gradient());
        if inner.batch == 1 {
            let i = sampler.sample();
            let w = correction_weight(inner.scheme, i, n);
            state.add_correction(obj, i, &x, w, &mut est);
        } else {
            let mut batch = sampler.sample_batch(inner.batch)?;
            // fixed summation order, so b = n is seed independent
            batch.sort_unstable();
            let w = 1.0 / inner.batch as f64;
            for i in batch {
                state.add_correction(obj, i, &x, w, &mut est);
            }
        }
        apply_step(inner.rule, inner.residual, eta, &est, &mut x);
        if inner.normalize {
            x = linalg::normalized(x).ok_or(SolverError::Degenerate)?;
        }
        linalg::axpy(1.0, &x, &mut sum);
        *counter += d as u64;
        if let Some(it) = iterates.as_deref_mut() {
            it.push(x.clone());
        }
    }
    Ok(EpochOut { last: x, sum })
}

/// Snapshot and next start from an epoch's output under `policy`.
pub(super) fn apply_policy(policy: SnapshotPolicy, out: EpochOut, m: usize) -> (Vec<f64>, Vec<f64>) {
    let EpochOut { last, mut sum } = out;
    match policy {
        SnapshotPolicy::Last => (last.clone(), last),
        SnapshotPolicy::Average => {
            linalg::scale(1.0 / m as f64, &mut sum);
            (sum.clone(), sum)
        }
        SnapshotPolicy::AverageThenLast => {
            linalg::scale(1.0 / m as f64, &mut sum);
            (sum, last)
        }
        SnapshotPolicy::AverageExcludingLastThenLast => {
            linalg::axpy(-1.0, &last, &mut sum);
            linalg::scale(1.0 / (m - 1) as f64, &mut sum);
            (sum, last)
        }
    }
}

fn use_lazy(config: &SolverConfig, obj: &Objective) -> bool {
    match config.sparse_mode {
        SparseMode::Lazy => true,
        SparseMode::Dense => false,
        SparseMode::Auto => {
            let ds = obj.data();
            let density = ds.nnz() as f64 / (ds.n_samples() * ds.n_features()) as f64;
            config.algorithm_supports_lazy()
                && config.batch_size == 1
                && config.trace < TraceLevel::Iterates
                && ds.has_sparse_rows()
                && density < 0.1
        }
    }
}

fn run_engine(
    config: &SolverConfig,
    obj: &Objective,
    lengths: &[usize],
    select_final: bool,
) -> Result<RunRecord, SolverError> {
    config.validate(obj)?;
    let n = obj.n_samples();
    let d = obj.dim();
    let policy = config.resolved_snapshot();
    let inner = Inner {
        obj,
        rule: config.resolved_update_rule(obj),
        residual: obj.residual_regularizer(),
        batch: config.batch_size,
        scheme: &config.sampling,
        normalize: false,
    };
    let lazy = use_lazy(config, obj);
    let mut sampler = IndexSampler::new(config.seed, &config.sampling, n)?;
    let x0 = initial_point(config, d);
    let mut tracker = Tracker::new(obj, config, &x0);
    let mut parts = RunParts {
        used_lazy: lazy,
        ..RunParts::default()
    };
    let keep_points = config.trace >= TraceLevel::Snapshots;
    let keep_iterates = config.trace == TraceLevel::Iterates;

    let mut snapshot = x0.clone();
    let mut start = x0.clone();
    let mut previous = x0.clone();
    let mut mean = SnapshotMean::new(d);
    for (s, &m) in (1..).zip(lengths) {
        let eta = config.step_for_epoch(s);
        let state = EstimatorState::new(obj, snapshot.clone());
        if keep_points {
            parts.start_points.push(start.clone());
        }
        let out = if lazy {
            lazy::lazy_epoch(
                &inner,
                &state,
                start,
                m,
                eta,
                &mut sampler,
                &mut parts.coordinate_updates,
            )
        } else {
            let iterates = keep_iterates.then_some(&mut parts.iterates);
            dense_epoch(
                &inner,
                &state,
                start,
                m,
                eta,
                &mut sampler,
                &mut parts.coordinate_updates,
                iterates,
            )?
        };
        let (snap, next_start) = apply_policy(policy, out, m);
        tracker.add_passes(1.0 + (m * config.batch_size) as f64 / n as f64);
        parts.epoch_lengths.push(m);
        previous = std::mem::replace(&mut snapshot, snap);
        start = next_start;
        mean.push(&snapshot);
        if keep_points {
            parts.snapshots.push(snapshot.clone());
        }
        if !tracker.record(s, &snapshot) {
            break;
        }
    }

    parts.final_x = if !matches!(tracker.status, super::RunStatus::Completed) {
        previous
    } else if mean.count > 0 && select_final {
        final_output_select(&snapshot, &mean.mean(), obj)
    } else {
        snapshot
    };
    Ok(tracker.finish(config, parts))
}
