//! A quick self-check of the oracles against the implementations, used by
//! the command-line `verify` mode.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{finite_diff_grad, ridge_closed_form, theoretical_rate_sc, variance_bound_report, RateOption};
use crate::data::{synthetic, Dataset};
use crate::estimator::{full_gradient, EstimatorState};
use crate::linalg;
use crate::model::{LossKind, Objective, Regularizer};
use crate::prox::ProxSpec;
use crate::solver::{run_deterministic, Algorithm, DeterministicMethod, SolverConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> CheckResult {
    CheckResult { name, passed, detail }
}

/// Runs every check; each one is small enough to finish in milliseconds.
pub fn run_verification() -> Vec<CheckResult> {
    vec![
        gradients(),
        estimator_identity(),
        variance_bound(),
        prox_grid(),
        ridge_cross_check(),
        rate_example(),
    ]
}

fn random_point(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-scale..scale)).collect()
}

fn gradients() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    let ds = match synthetic::classification(20, 4, 1) {
        Ok(ds) => Arc::new(ds.normalize_rows()),
        Err(e) => return check("component gradients", false, e.to_string()),
    };
    for loss in [
        LossKind::Logistic,
        LossKind::Squared,
        LossKind::Sigmoid,
        LossKind::EigenQuadratic,
    ] {
        let reg = if loss == LossKind::EigenQuadratic {
            Regularizer::None
        } else {
            Regularizer::L2(0.1)
        };
        let obj = Objective::new(ds.clone(), loss, reg)
            .expect("±1 labels")
            .with_folded_l2(true);
        for _ in 0..10 {
            let x = random_point(&mut rng, 4, 2.0);
            let i = rng.random_range(0..20);
            let fd = finite_diff_grad(|p| obj.component_value(i, p), &x, 1e-6);
            let g = obj.component_gradient(i, &x);
            worst = worst.max(
                linalg::rel_diff_inf(&fd, &g).min(fd.iter().zip(&g).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)),
            );
        }
    }
    check(
        "component gradients",
        worst <= 1e-5,
        format!("max deviation {worst:.2e}"),
    )
}

fn estimator_identity() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let ds = Arc::new(synthetic::ridge(30, 5, 2).expect("valid sizes"));
    let obj = Objective::new(ds, LossKind::Squared, Regularizer::L2(0.1))
        .expect("valid")
        .with_folded_l2(true);
    let x = random_point(&mut rng, 5, 1.0);
    let state = EstimatorState::new(&obj, random_point(&mut rng, 5, 1.0));
    let mut mean = vec![0.0; 5];
    for i in 0..30 {
        linalg::axpy(1.0 / 30.0, &state.svrg_estimate(&obj, i, &x), &mut mean);
    }
    let full = full_gradient(&obj, &x);
    let rel = linalg::dist(&mean, &full) / linalg::norm(&full).max(f64::MIN_POSITIVE);
    check(
        "estimator unbiasedness",
        rel <= 1e-12,
        format!("relative error {rel:.2e}"),
    )
}

fn variance_bound() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let ds = Arc::new(synthetic::ridge(8, 3, 3).expect("valid sizes").normalize_rows());
    let xstar = match ridge_closed_form(&ds, 0.1) {
        Ok(x) => x,
        Err(e) => return check("variance bound", false, e.to_string()),
    };
    let obj = Objective::new(ds, LossKind::Squared, Regularizer::L2(0.1))
        .expect("valid")
        .with_folded_l2(true);
    let mut failures = 0;
    for _ in 0..5 {
        let x = random_point(&mut rng, 3, 1.0);
        let snap = random_point(&mut rng, 3, 1.0);
        for b in 1..=8 {
            match variance_bound_report(&obj, &x, &snap, &xstar, b) {
                Ok(r) if r.satisfied => {}
                _ => failures += 1,
            }
        }
    }
    check(
        "variance bound",
        failures == 0,
        format!("{failures} violations in 40 cases"),
    )
}

fn prox_grid() -> CheckResult {
    let regs = [
        Regularizer::None,
        Regularizer::L2(0.5),
        Regularizer::L1(0.3),
        Regularizer::ElasticNet { l2: 0.5, l1: 0.3 },
    ];
    let mut worst: f64 = 0.0;
    for reg in regs {
        let p = ProxSpec::new(reg, 0.7).expect("positive step");
        for &y in &[-1.5, -0.2, 0.0, 0.21, 1.1] {
            let best = (0..=4000)
                .map(|k| -2.0 + k as f64 * 1e-3)
                .min_by(|a, b| p.objective(&[y], &[*a]).total_cmp(&p.objective(&[y], &[*b])))
                .expect("nonempty grid");
            worst = worst.max((best - p.apply_scalar(y)).abs());
        }
    }
    check("prox grid search", worst <= 1e-3, format!("max deviation {worst:.2e}"))
}

fn ridge_cross_check() -> CheckResult {
    let ds: Arc<Dataset> = Arc::new(synthetic::ridge(40, 4, 4).expect("valid sizes").normalize_rows());
    let xstar = match ridge_closed_form(&ds, 0.1) {
        Ok(x) => x,
        Err(e) => return check("ridge oracle vs gradient descent", false, e.to_string()),
    };
    let obj = Objective::new(ds, LossKind::Squared, Regularizer::L2(0.1)).expect("valid");
    let l = obj.smoothness_constant() + 0.1;
    let cfg = SolverConfig::new(Algorithm::Gd, 1.0 / l).epochs(1000);
    match run_deterministic(&cfg, &obj, DeterministicMethod::Gd) {
        Ok(rec) => {
            let dist = linalg::dist(&rec.final_x, &xstar);
            check(
                "ridge oracle vs gradient descent",
                dist <= 1e-8,
                format!("distance {dist:.2e}"),
            )
        }
        Err(e) => check("ridge oracle vs gradient descent", false, e.to_string()),
    }
}

fn rate_example() -> CheckResult {
    match theoretical_rate_sc(1.0, 0.1, 0.1, 2000, 1.0, RateOption::II) {
        Ok(r) => check(
            "rate calculator",
            (r.rho - 0.350).abs() <= 1e-3,
            format!("rho = {:.6}", r.rho),
        ),
        Err(e) => check("rate calculator", false, e.to_string()),
    }
}

#[cfg(test)]
mod tests {
    #[test]
    fn every_check_passes() {
        for r in super::run_verification() {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
    }
}
