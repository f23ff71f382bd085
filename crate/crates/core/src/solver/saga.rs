use crate::data::IndexSampler;
use crate::error::SolverError;
use crate::estimator::SagaState;
use crate::model::Objective;

use super::config::{Algorithm, SolverConfig, TraceLevel};
use super::record::RunRecord;
use super::svrg::apply_step;
use super::{check_algorithm, initial_point, RunParts, Tracker};

/// SAGA with a scalar gradient table filled at `x⁰`. A trace row is written
/// every `m` steps (default `n`, one pass).
pub fn run_saga(config: &SolverConfig, obj: &Objective) -> Result<RunRecord, SolverError> {
    check_algorithm(config, &[Algorithm::Saga])?;
    config.validate(obj)?;
    let n = obj.n_samples();
    let d = obj.dim();
    let m = config.resolved_epoch_length(n);
    let rule = config.resolved_update_rule(obj);
    let residual = obj.residual_regularizer();
    let mut sampler = IndexSampler::new(config.seed, &config.sampling, n)?;
    let mut x = initial_point(config, d);
    let mut tracker = Tracker::new(obj, config, &x);
    let mut parts = RunParts::default();

    let mut table = SagaState::new(obj, &x);
    tracker.add_passes(1.0);
    for s in 1..=config.epochs {
        let eta = config.step_for_epoch(s);
        if config.trace >= TraceLevel::Snapshots {
            parts.start_points.push(x.clone());
        }
        for _ in 0..m {
            let i = sampler.sample();
            let est = table.estimate_and_update(obj, i, &x);
            apply_step(rule, residual, eta, &est, &mut x);
            parts.coordinate_updates += d as u64;
            if config.trace == TraceLevel::Iterates {
                parts.iterates.push(x.clone());
            }
        }
        tracker.add_passes(m as f64 / n as f64);
        parts.epoch_lengths.push(m);
        if config.trace >= TraceLevel::Snapshots {
            parts.snapshots.push(x.clone());
        }
        if !tracker.record(s, &x) {
            break;
        }
    }
    parts.final_x = x;
    Ok(tracker.finish(config, parts))
}
