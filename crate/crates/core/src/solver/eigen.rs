//! Leading eigenvector of `C = (1/n) Σ a_i a_iᵀ` as
//! `min_{‖x‖=1} −xᵀCx`.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data::{Dataset, IndexSampler};
use crate::error::SolverError;
use crate::estimator::EstimatorState;
use crate::linalg;
use crate::model::{LossKind, Objective, Regularizer};

use super::config::{Algorithm, SnapshotPolicy, SolverConfig, TraceLevel, UpdateRule};
use super::record::RunRecord;
use super::svrg::{apply_policy, dense_epoch, Inner};
use super::{check_algorithm, RunParts, Tracker};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenMethod {
    /// `x ← Cx/‖Cx‖`, one pass per iteration.
    Power,
    /// SVRG steps, last-iterate snapshot.
    VrPca,
    /// SVRG steps, averaged (then renormalized) snapshot, last-iterate restart.
    VrSgd,
}

/// Stream offset for the random start, so it never shares draws with the
/// index sampler.
const START_STREAM: u64 = 0x5e_ed0f_e16e;

fn random_unit(d: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ START_STREAM);
    loop {
        let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
        if let Some(u) = linalg::normalized(v) {
            return u;
        }
    }
}

/// Runs an eigen solver. The trace objective is `−xᵀCx`; with `f_star` set
/// to `−λ_max` the record's [`RunRecord::relative_errors`] give
/// `log₁₀(1 − xᵀCx/λ_max)`.
pub fn run_eigen(config: &SolverConfig, ds: &Arc<Dataset>, method: EigenMethod) -> Result<RunRecord, SolverError> {
    let expected = match method {
        EigenMethod::Power => Algorithm::Power,
        EigenMethod::VrPca => Algorithm::VrPca,
        EigenMethod::VrSgd => Algorithm::EigenVrSgd,
    };
    check_algorithm(config, &[expected])?;
    let obj = Objective::new(ds.clone(), LossKind::EigenQuadratic, Regularizer::None)?;
    config.validate(&obj)?;
    if ds.rows().iter().all(|r| r.norm_sq() == 0.0) {
        return Err(SolverError::Degenerate);
    }
    let n = obj.n_samples();
    let d = obj.dim();
    let x0 = match &config.x0 {
        Some(x) => linalg::normalized(x.clone()).ok_or(SolverError::Degenerate)?,
        None => random_unit(d, config.seed),
    };
    let mut tracker = Tracker::new(&obj, config, &x0).without_guard();
    let mut parts = RunParts::default();
    let keep_points = config.trace >= TraceLevel::Snapshots;

    if method == EigenMethod::Power {
        let mut x = x0;
        for k in 1..=config.epochs {
            // Cx = −∇F(x)/2
            let g = obj.smooth_gradient(&x);
            x = linalg::normalized(g.iter().map(|v| -v).collect()).ok_or(SolverError::Degenerate)?;
            tracker.add_passes(1.0);
            parts.epoch_lengths.push(1);
            parts.coordinate_updates += d as u64;
            if config.trace == TraceLevel::Iterates {
                parts.iterates.push(x.clone());
            }
            tracker.record(k, &x);
        }
        parts.final_x = x;
        return Ok(tracker.finish(config, parts));
    }

    let policy = match method {
        EigenMethod::VrPca => SnapshotPolicy::Last,
        _ => config.resolved_snapshot(),
    };
    let m = config.resolved_epoch_length(n);
    let inner = Inner {
        obj: &obj,
        rule: UpdateRule::Smooth,
        residual: Regularizer::None,
        batch: config.batch_size,
        scheme: &config.sampling,
        normalize: true,
    };
    let mut sampler = IndexSampler::new(config.seed, &config.sampling, n)?;
    let mut snapshot = x0.clone();
    let mut start = x0;
    for s in 1..=config.epochs {
        let eta = config.step_for_epoch(s);
        let state = EstimatorState::new(&obj, snapshot.clone());
        if keep_points {
            parts.start_points.push(start.clone());
        }
        let iterates = (config.trace == TraceLevel::Iterates).then_some(&mut parts.iterates);
        let out = dense_epoch(
            &inner,
            &state,
            start,
            m,
            eta,
            &mut sampler,
            &mut parts.coordinate_updates,
            iterates,
        )?;
        let (snap, next_start) = apply_policy(policy, out, m);
        // the mean of unit vectors sits inside the ball
        snapshot = linalg::normalized(snap).ok_or(SolverError::Degenerate)?;
        start = next_start;
        tracker.add_passes(1.0 + (m * config.batch_size) as f64 / n as f64);
        parts.epoch_lengths.push(m);
        if keep_points {
            parts.snapshots.push(snapshot.clone());
        }
        tracker.record(s, &snapshot);
    }
    parts.final_x = snapshot;
    Ok(tracker.finish(config, parts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::{eigen_relative_error, leading_eigen};

    fn diagonal() -> Arc<Dataset> {
        Arc::new(Dataset::from_dense(vec![vec![2f64.sqrt(), 0.0], vec![0.0, 1.0]], vec![0.0, 0.0]).unwrap())
    }

    #[test]
    fn all_methods_find_the_dominant_axis() {
        let ds = diagonal();
        for (alg, method, step) in [
            (Algorithm::Power, EigenMethod::Power, 1.0),
            (Algorithm::VrPca, EigenMethod::VrPca, 0.2),
            (Algorithm::EigenVrSgd, EigenMethod::VrSgd, 0.2),
        ] {
            let cfg = SolverConfig::new(alg, step).epochs(60).seed(3).f_star(-1.0);
            let rec = run_eigen(&cfg, &ds, method).unwrap();
            assert!((rec.final_x[0].abs() - 1.0).abs() < 1e-12, "{alg:?}: {:?}", rec.final_x);
            assert!(rec.relative_errors().unwrap().last().unwrap() < &-12.0);
        }
    }

    #[test]
    fn power_iteration_fixes_the_leading_vector() {
        let ds = Arc::new(crate::data::synthetic::with_spectrum(40, &[3.0, 1.0, 0.5], 2).unwrap());
        let lead = leading_eigen(&ds);
        let cfg = SolverConfig::new(Algorithm::Power, 1.0)
            .epochs(3)
            .x0(lead.vector.clone())
            .trace(TraceLevel::Iterates);
        let rec = run_eigen(&cfg, &ds, EigenMethod::Power).unwrap();
        for x in &rec.iterates {
            assert!(linalg::dist(x, &lead.vector) < 1e-12);
        }
        assert!(eigen_relative_error(&ds, &rec.final_x, lead.value) < -12.0);
    }

    #[test]
    fn iterates_stay_on_the_sphere() {
        let ds = Arc::new(crate::data::synthetic::with_spectrum(30, &[2.0, 1.0, 0.5, 0.1], 5).unwrap());
        let cfg = SolverConfig::new(Algorithm::EigenVrSgd, 0.05)
            .epochs(3)
            .trace(TraceLevel::Iterates);
        let rec = run_eigen(&cfg, &ds, EigenMethod::VrSgd).unwrap();
        for x in &rec.iterates {
            assert!((linalg::norm(x) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_matrix_is_degenerate() {
        let ds = Arc::new(Dataset::from_dense(vec![vec![0.0, 0.0]; 3], vec![0.0; 3]).unwrap());
        let cfg = SolverConfig::new(Algorithm::Power, 1.0);
        assert!(matches!(
            run_eigen(&cfg, &ds, EigenMethod::Power),
            Err(SolverError::Degenerate)
        ));
    }
}
