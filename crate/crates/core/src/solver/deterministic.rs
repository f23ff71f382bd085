//! Full-gradient baselines and plain SGD. For GD, AGD and APG one epoch is
//! one iteration and one effective pass.

use crate::data::IndexSampler;
use crate::error::SolverError;
use crate::model::Objective;

use super::config::{Algorithm, SolverConfig, TraceLevel};
use super::record::RunRecord;
use super::svrg::apply_step;
use super::{check_algorithm, correction_weight, initial_point, RunParts, RunStatus, Tracker};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeterministicMethod {
    Gd,
    /// Constant momentum `(√L − √μ)/(√L + √μ)`.
    Agd,
    /// FISTA momentum sequence.
    Apg,
    /// `η_k = η₀/√k`
    Sgd,
}

/// `(√L − √μ)/(√L + √μ)`
pub fn agd_momentum(l: f64, mu: f64) -> f64 {
    (l.sqrt() - mu.sqrt()) / (l.sqrt() + mu.sqrt())
}

/// `α_{k+1} = (1 + √(1 + 4α_k²))/2`
pub fn apg_next_alpha(alpha: f64) -> f64 {
    (1.0 + (1.0 + 4.0 * alpha * alpha).sqrt()) / 2.0
}

pub fn run_deterministic(
    config: &SolverConfig,
    obj: &Objective,
    method: DeterministicMethod,
) -> Result<RunRecord, SolverError> {
    let expected = match method {
        DeterministicMethod::Gd => Algorithm::Gd,
        DeterministicMethod::Agd => Algorithm::Agd,
        DeterministicMethod::Apg => Algorithm::Apg,
        DeterministicMethod::Sgd => Algorithm::Sgd,
    };
    check_algorithm(config, &[expected])?;
    config.validate(obj)?;
    if method == DeterministicMethod::Sgd {
        return run_sgd(config, obj);
    }
    let d = obj.dim();
    let rule = config.resolved_update_rule(obj);
    let residual = obj.residual_regularizer();
    let l = obj.smoothness_constant() + residual.l2_weight();
    let agd_w = agd_momentum(l, obj.strong_convexity());

    let mut x = initial_point(config, d);
    let mut x_prev = x.clone();
    let mut tracker = Tracker::new(obj, config, &x);
    let mut parts = RunParts::default();
    let mut alpha = 1.0;
    let mut y = vec![0.0; d];
    for k in 1..=config.epochs {
        let w = match method {
            DeterministicMethod::Gd => 0.0,
            DeterministicMethod::Agd => agd_w,
            DeterministicMethod::Apg => {
                let next = apg_next_alpha(alpha);
                let w = (alpha - 1.0) / next;
                alpha = next;
                w
            }
            DeterministicMethod::Sgd => unreachable!(),
        };
        for j in 0..d {
            y[j] = x[j] + w * (x[j] - x_prev[j]);
        }
        let g = obj.smooth_gradient(&y);
        let eta = config.step_for_epoch(k);
        let mut next = y.clone();
        apply_step(rule, residual, eta, &g, &mut next);
        x_prev = std::mem::replace(&mut x, next);
        tracker.add_passes(1.0);
        parts.epoch_lengths.push(1);
        parts.coordinate_updates += d as u64;
        if config.trace == TraceLevel::Iterates {
            parts.iterates.push(x.clone());
        }
        if !tracker.record(k, &x) {
            break;
        }
    }
    parts.final_x = match tracker.status {
        RunStatus::Diverged { .. } => x_prev,
        RunStatus::Completed => x,
    };
    Ok(tracker.finish(config, parts))
}

fn run_sgd(config: &SolverConfig, obj: &Objective) -> Result<RunRecord, SolverError> {
    let n = obj.n_samples();
    let d = obj.dim();
    let m = config.resolved_epoch_length(n);
    let rule = config.resolved_update_rule(obj);
    let residual = obj.residual_regularizer();
    let mut sampler = IndexSampler::new(config.seed, &config.sampling, n)?;
    let mut x = initial_point(config, d);
    let mut x_good = x.clone();
    let mut tracker = Tracker::new(obj, config, &x);
    let mut parts = RunParts::default();
    let mut g = vec![0.0; d];
    let mut step_count = 0usize;
    for s in 1..=config.epochs {
        for _ in 0..m {
            step_count += 1;
            let eta = config.step / (step_count as f64).sqrt();
            let i = sampler.sample();
            g.iter_mut().for_each(|v| *v = 0.0);
            obj.add_component_gradient(i, &x, correction_weight(&config.sampling, i, n), &mut g);
            apply_step(rule, residual, eta, &g, &mut x);
            parts.coordinate_updates += d as u64;
            if config.trace == TraceLevel::Iterates {
                parts.iterates.push(x.clone());
            }
        }
        tracker.add_passes(m as f64 / n as f64);
        parts.epoch_lengths.push(m);
        if !tracker.record(s, &x) {
            break;
        }
        x_good.clone_from(&x);
    }
    parts.final_x = x_good;
    Ok(tracker.finish(config, parts))
}
