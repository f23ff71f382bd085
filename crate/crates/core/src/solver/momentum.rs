//! VR-SGD with momentum: the iterate is a convex combination of the snapshot
//! and an auxiliary sequence `v`.

use crate::data::IndexSampler;
use crate::error::SolverError;
use crate::estimator::EstimatorState;
use crate::linalg;
use crate::model::Objective;

use super::config::{Algorithm, MomentumOption, SolverConfig, TraceLevel};
use super::record::RunRecord;
use super::svrg::apply_step;
use super::{check_algorithm, correction_weight, final_output_select, initial_point};
use super::{RunParts, RunStatus, SnapshotMean, Tracker};

/// `w_s = max{α, 2/(s+1)}`
pub fn momentum_weight(s: usize, alpha: f64) -> f64 {
    alpha.max(2.0 / (s as f64 + 1.0))
}

pub fn run_momentum_vr_sgd(config: &SolverConfig, obj: &Objective) -> Result<RunRecord, SolverError> {
    check_algorithm(config, &[Algorithm::MomentumVrSgd])?;
    config.validate(obj)?;
    let n = obj.n_samples();
    let d = obj.dim();
    let m = config.resolved_epoch_length(n);
    let rule = config.resolved_update_rule(obj);
    let residual = obj.residual_regularizer();
    let mut sampler = IndexSampler::new(config.seed, &config.sampling, n)?;
    let x0 = initial_point(config, d);
    let mut tracker = Tracker::new(obj, config, &x0);
    let mut parts = RunParts::default();
    let keep_points = config.trace >= TraceLevel::Snapshots;
    let keep_iterates = config.trace == TraceLevel::Iterates;

    let mut snapshot = x0.clone();
    let mut previous = x0.clone();
    let mut x_start = x0.clone();
    let mut v_carry = x0;
    let mut mean = SnapshotMean::new(d);
    let mut est = vec![0.0; d];
    for s in 1..=config.epochs {
        let eta = config.step_for_epoch(s);
        let w = momentum_weight(s, config.alpha);
        let state = EstimatorState::new(obj, snapshot.clone());
        let (mut x, mut v) = match config.momentum {
            MomentumOption::I => {
                // v₀ on the coupling line through x̃ and x₀
                let v: Vec<f64> = x_start
                    .iter()
                    .zip(&snapshot)
                    .map(|(xs, sn)| sn + (xs - sn) / w)
                    .collect();
                (x_start.clone(), v)
            }
            MomentumOption::ILiteral => (x_start.clone(), x_start.clone()),
            MomentumOption::II => {
                let x: Vec<f64> = v_carry
                    .iter()
                    .zip(&snapshot)
                    .map(|(v, sn)| w * v + (1.0 - w) * sn)
                    .collect();
                (x, v_carry.clone())
            }
        };
        if keep_points {
            parts.start_points.push(x.clone());
        }
        let mut sum = vec![0.0; d];
        for _ in 0..m {
            let i = sampler.sample();
            est.copy_from_slice(state.anchor_gradient());
            state.add_correction(obj, i, &x, correction_weight(&config.sampling, i, n), &mut est);
            // ∇g is taken at x, not v
            let mut g = est.clone();
            if matches!(rule, super::UpdateRule::Smooth) {
                residual.add_gradient(&x, &mut g);
                linalg::axpy(-eta, &g, &mut v);
            } else {
                apply_step(rule, residual, eta, &est, &mut v);
            }
            for ((xj, vj), sj) in x.iter_mut().zip(&v).zip(&snapshot) {
                *xj = sj + w * (vj - sj);
            }
            linalg::axpy(1.0, &x, &mut sum);
            parts.coordinate_updates += 2 * d as u64;
            if keep_iterates {
                parts.iterates.push(x.clone());
            }
        }
        linalg::scale(1.0 / m as f64, &mut sum);
        tracker.add_passes(1.0 + m as f64 / n as f64);
        parts.epoch_lengths.push(m);
        previous = std::mem::replace(&mut snapshot, sum);
        x_start = x;
        v_carry = v;
        mean.push(&snapshot);
        if keep_points {
            parts.snapshots.push(snapshot.clone());
        }
        if !tracker.record(s, &snapshot) {
            break;
        }
    }
    parts.final_x = match tracker.status {
        RunStatus::Diverged { .. } => previous,
        RunStatus::Completed if mean.count > 0 => final_output_select(&snapshot, &mean.mean(), obj),
        RunStatus::Completed => snapshot,
    };
    Ok(tracker.finish(config, parts))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::data::{synthetic, Dataset};
    use crate::model::{LossKind, Regularizer};
    use crate::solver::{run_vr_sgd, LrMode};

    #[test]
    fn unit_weight_collapses_to_vr_sgd() {
        let ds = Arc::new(synthetic::classification(40, 5, 2).unwrap().normalize_rows());
        let obj = Objective::new(ds, LossKind::Logistic, Regularizer::L2(1e-3)).unwrap();
        let base = |a| {
            SolverConfig::new(a, 0.5)
                .epochs(4)
                .seed(11)
                .lr_mode(LrMode::Fixed, 1.0)
                .trace(TraceLevel::Iterates)
        };
        let mom = run_momentum_vr_sgd(&base(Algorithm::MomentumVrSgd), &obj).unwrap();
        let plain = run_vr_sgd(&base(Algorithm::VrSgd), &obj).unwrap();
        assert_eq!(mom.iterates.len(), plain.iterates.len());
        for (a, b) in mom.iterates.iter().zip(&plain.iterates) {
            assert!(linalg::rel_diff_inf(a, b) <= 1e-12);
        }
    }

    #[test]
    fn equivalence_with_varying_steps() {
        let ds = Arc::new(synthetic::classification(50, 6, 5).unwrap().normalize_rows());
        let obj = Objective::new(ds, LossKind::Logistic, Regularizer::L2(1e-4)).unwrap();
        let eta0 = 0.6;
        let mom = SolverConfig::new(Algorithm::MomentumVrSgd, eta0)
            .epochs(5)
            .seed(3)
            .lr_mode(LrMode::Varying, 0.05)
            .trace(TraceLevel::Iterates);
        let plain = SolverConfig::new(Algorithm::VrSgd, eta0)
            .epochs(5)
            .seed(3)
            .trace(TraceLevel::Iterates);
        let a = run_momentum_vr_sgd(&mom, &obj).unwrap();
        let b = run_vr_sgd(&plain, &obj).unwrap();
        for (x, y) in a.iterates.iter().zip(&b.iterates) {
            assert!(linalg::rel_diff_inf(x, y) <= 1e-9);
        }
        // the literal start breaks the identity after the first epoch
        let mut literal = mom.clone();
        literal.momentum = MomentumOption::ILiteral;
        let c = run_momentum_vr_sgd(&literal, &obj).unwrap();
        let m = 100;
        assert!(linalg::rel_diff_inf(&c.iterates[m - 1], &b.iterates[m - 1]) <= 1e-12);
        assert!(linalg::rel_diff_inf(&c.iterates[4 * m], &b.iterates[4 * m]) > 1e-6);
    }

    #[test]
    fn option_two_single_sample_recursion() {
        // f(x) = (x − 2)²/2, one coordinate, so the estimator is exact
        let ds = Dataset::from_dense(vec![vec![1.0]], vec![2.0]).unwrap();
        let obj = Objective::new(Arc::new(ds), LossKind::Squared, Regularizer::None).unwrap();
        let (eta0, alpha) = (0.3, 0.25);
        let mut cfg = SolverConfig::new(Algorithm::MomentumVrSgd, eta0)
            .epochs(1)
            .epoch_length(5)
            .lr_mode(LrMode::Varying, alpha)
            .trace(TraceLevel::Iterates);
        cfg.momentum = MomentumOption::II;
        cfg.x0 = Some(vec![0.5]);
        let rec = run_momentum_vr_sgd(&cfg, &obj).unwrap();

        let w = 1.0f64;
        let eta = eta0 / alpha.max(1.0);
        let snap = 0.5;
        let (mut v, mut x) = (0.5, w * 0.5 + (1.0 - w) * snap);
        for k in 0..5 {
            v -= eta * (x - 2.0);
            x = snap + w * (v - snap);
            assert!((rec.iterates[k][0] - x).abs() < 1e-15);
        }

        // a second epoch exercises w < 1 and the carried v
        cfg.epochs = 2;
        let rec = run_momentum_vr_sgd(&cfg, &obj).unwrap();
        let snap2: f64 = rec.iterates[..5].iter().map(|x| x[0]).sum::<f64>() / 5.0;
        let w2 = alpha.max(2.0 / 3.0);
        let eta2 = eta0 / w2;
        let mut x = w2 * v + (1.0 - w2) * snap2;
        for k in 0..5 {
            v -= eta2 * (x - 2.0);
            x = snap2 + w2 * (v - snap2);
            assert!((rec.iterates[5 + k][0] - x).abs() < 1e-14, "step {k}");
        }
    }
}
