use crate::data::IndexSampler;
use crate::error::SolverError;
use crate::estimator::EstimatorState;
use crate::linalg;
use crate::model::Objective;
use crate::prox::ProxSpec;

use super::config::{Algorithm, SolverConfig, TraceLevel};
use super::record::RunRecord;
use super::{check_algorithm, correction_weight, initial_point, RunParts, RunStatus, Tracker};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KatyushaVariant {
    /// Gradient steps for `y` and `z`.
    I,
    /// Proximal steps for `y` and `z`.
    II,
}

/// `w₁` for epoch `s`: `min{√(mμ/(3L)), 0.5}` when `μ > 0`, else
/// `min{2/(s+1), 0.5}`.
pub fn katyusha_w1(s: usize, m: usize, mu: f64, l: f64) -> f64 {
    if mu > 0.0 {
        (m as f64 * mu / (3.0 * l)).sqrt().min(0.5)
    } else {
        (2.0 / (s as f64 + 1.0)).min(0.5)
    }
}

/// Katyusha with `x = w₁y + w₂x̃ + (1 − w₁ − w₂)z`, `η = 1/(3w₁L)` and the
/// epoch average of `x` as snapshot.
pub fn run_katyusha(
    config: &SolverConfig,
    obj: &Objective,
    variant: KatyushaVariant,
) -> Result<RunRecord, SolverError> {
    check_algorithm(config, &[Algorithm::KatyushaI, Algorithm::KatyushaII])?;
    config.validate(obj)?;
    if variant == KatyushaVariant::I && !obj.residual_regularizer().is_smooth() {
        return Err(SolverError::Config(
            "katyusha-i needs a differentiable regularizer".into(),
        ));
    }
    let n = obj.n_samples();
    let d = obj.dim();
    let m = config.resolved_epoch_length(n);
    let residual = obj.residual_regularizer();
    // L and μ of the whole objective
    let l = obj.smoothness_constant() + residual.l2_weight();
    let mu = obj.strong_convexity();
    let w2 = config.katyusha.w2;
    let mut sampler = IndexSampler::new(config.seed, &config.sampling, n)?;
    let x0 = initial_point(config, d);
    let mut tracker = Tracker::new(obj, config, &x0);
    let mut parts = RunParts::default();

    let mut snapshot = x0.clone();
    let mut previous = x0.clone();
    let mut y = x0.clone();
    let mut z = x0;
    let mut x = vec![0.0; d];
    let mut est = vec![0.0; d];
    for s in 1..=config.epochs {
        let w1 = config.katyusha.w1.unwrap_or_else(|| katyusha_w1(s, m, mu, l));
        let eta = 1.0 / (3.0 * w1 * l);
        let y_prox = ProxSpec::new(residual, eta).ok_or(SolverError::Degenerate)?;
        let z_prox = ProxSpec::new(residual, 1.0 / (3.0 * l)).ok_or(SolverError::Degenerate)?;
        let state = EstimatorState::new(obj, snapshot.clone());
        if config.trace >= TraceLevel::Snapshots {
            parts.start_points.push(y.clone());
        }
        let mut sum = vec![0.0; d];
        for _ in 0..m {
            for j in 0..d {
                x[j] = w1 * y[j] + w2 * snapshot[j] + (1.0 - w1 - w2) * z[j];
            }
            let i = sampler.sample();
            est.copy_from_slice(state.anchor_gradient());
            state.add_correction(obj, i, &x, correction_weight(&config.sampling, i, n), &mut est);
            match variant {
                KatyushaVariant::II => {
                    for j in 0..d {
                        y[j] = y_prox.apply_scalar(y[j] - eta * est[j]);
                        z[j] = z_prox.apply_scalar(x[j] - est[j] / (3.0 * l));
                    }
                }
                KatyushaVariant::I => {
                    residual.add_gradient(&x, &mut est);
                    for j in 0..d {
                        y[j] -= eta * est[j];
                        z[j] = x[j] - est[j] / (3.0 * l);
                    }
                }
            }
            linalg::axpy(1.0, &x, &mut sum);
            parts.coordinate_updates += 3 * d as u64;
            if config.trace == TraceLevel::Iterates {
                parts.iterates.push(x.clone());
            }
        }
        linalg::scale(1.0 / m as f64, &mut sum);
        tracker.add_passes(1.0 + m as f64 / n as f64);
        parts.epoch_lengths.push(m);
        previous = std::mem::replace(&mut snapshot, sum);
        if config.trace >= TraceLevel::Snapshots {
            parts.snapshots.push(snapshot.clone());
        }
        if !tracker.record(s, &snapshot) {
            break;
        }
    }
    parts.final_x = match tracker.status {
        RunStatus::Diverged { .. } => previous,
        RunStatus::Completed => snapshot,
    };
    Ok(tracker.finish(config, parts))
}
