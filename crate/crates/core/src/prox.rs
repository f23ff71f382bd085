//! Proximal operators `argmin_x { ‖x − y‖²/(2η) + g(x) }`.

use crate::model::Regularizer;

/// A regularizer paired with a step size `η > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProxSpec {
    reg: Regularizer,
    step: f64,
}

impl ProxSpec {
    /// Returns `None` unless `step` is finite and positive.
    pub fn new(reg: Regularizer, step: f64) -> Option<Self> {
        (step.is_finite() && step > 0.0).then_some(Self { reg, step })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn regularizer(&self) -> Regularizer {
        self.reg
    }

    /// The soft-threshold level `λ₂η` and the shrink factor `1/(1 + λ₁η)`.
    fn params(&self) -> (f64, f64) {
        (
            self.reg.l1_weight() * self.step,
            1.0 / (1.0 + self.reg.l2_weight() * self.step),
        )
    }

    /// Prox of one coordinate. The operator is separable, so this is exactly
    /// what [`ProxSpec::apply`] does per coordinate.
    #[inline]
    pub fn apply_scalar(&self, y: f64) -> f64 {
        let (threshold, shrink) = self.params();
        soft_threshold(y, threshold) * shrink
    }

    pub fn apply(&self, y: &[f64]) -> Vec<f64> {
        y.iter().map(|&v| self.apply_scalar(v)).collect()
    }

    pub fn apply_in_place(&self, y: &mut [f64]) {
        if self.reg == Regularizer::None {
            return;
        }
        for v in y {
            *v = self.apply_scalar(*v);
        }
    }

    /// `‖x − y‖²/(2η) + g(x)`
    pub fn objective(&self, y: &[f64], x: &[f64]) -> f64 {
        let quad: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        quad / (2.0 * self.step) + self.reg.value(x)
    }

    /// Norm of the smallest element of `(x − y)/η + ∂g(x)`.
    ///
    /// Zero exactly when `x` is the prox of `y`.
    pub fn optimality_residual(&self, y: &[f64], x: &[f64]) -> f64 {
        let (l2, l1) = (self.reg.l2_weight(), self.reg.l1_weight());
        x.iter()
            .zip(y)
            .map(|(&xj, &yj)| {
                let smooth = (xj - yj) / self.step + l2 * xj;
                let r = if xj != 0.0 {
                    smooth + l1 * xj.signum()
                } else {
                    // ∂|0| = [−1, 1]: pick the subgradient closest to cancelling
                    soft_threshold(smooth, l1)
                };
                r * r
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// `sign(y)·max(|y| − t, 0)`; `|y| = t` maps to exactly zero.
#[inline]
pub fn soft_threshold(y: f64, t: f64) -> f64 {
    if y.abs() <= t {
        0.0
    } else {
        y - t.copysign(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn regs() -> Vec<Regularizer> {
        vec![
            Regularizer::None,
            Regularizer::L2(0.7),
            Regularizer::L1(0.4),
            Regularizer::ElasticNet { l2: 0.7, l1: 0.4 },
        ]
    }

    #[test]
    fn soft_threshold_examples() {
        let p = ProxSpec::new(Regularizer::L1(0.3), 1.0).unwrap();
        assert!((p.apply_scalar(1.0) - 0.7).abs() < 1e-15);
        assert_eq!(p.apply_scalar(-0.2), 0.0);
        assert_eq!(p.apply_scalar(0.3), 0.0);
        assert_eq!(p.apply_scalar(-0.3), 0.0);
        // λ₂η = 0.3 reached through a different split
        let p = ProxSpec::new(Regularizer::L1(3.0), 0.1).unwrap();
        assert!((p.apply_scalar(1.0) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn ridge_closed_form() {
        let p = ProxSpec::new(Regularizer::L2(1.0), 0.1).unwrap();
        for v in p.apply(&[1.0, 1.0]) {
            assert!((v - 1.0 / 1.1).abs() < 1e-15);
            assert!((v - 0.90909).abs() < 1e-5);
        }
    }

    #[test]
    fn identity_without_regularizer() {
        let p = ProxSpec::new(Regularizer::None, 0.5).unwrap();
        let y = vec![1.5, -2.0, 0.0, 1e-300];
        assert_eq!(p.apply(&y), y);
    }

    #[test]
    fn elastic_net_degenerate_weights() {
        let y = [1.3, -0.2, 0.05, -4.0];
        let en = ProxSpec::new(Regularizer::ElasticNet { l2: 0.0, l1: 0.25 }, 0.8).unwrap();
        let l1 = ProxSpec::new(Regularizer::L1(0.25), 0.8).unwrap();
        assert_eq!(en.apply(&y), l1.apply(&y));
        let en = ProxSpec::new(Regularizer::ElasticNet { l2: 0.25, l1: 0.0 }, 0.8).unwrap();
        let l2 = ProxSpec::new(Regularizer::L2(0.25), 0.8).unwrap();
        assert_eq!(en.apply(&y), l2.apply(&y));
    }

    #[test]
    fn rejects_bad_steps() {
        assert!(ProxSpec::new(Regularizer::None, 0.0).is_none());
        assert!(ProxSpec::new(Regularizer::None, -1.0).is_none());
        assert!(ProxSpec::new(Regularizer::None, f64::NAN).is_none());
    }

    #[test]
    fn residual_examples() {
        let p = ProxSpec::new(Regularizer::L1(0.3), 1.0).unwrap();
        assert!((p.optimality_residual(&[1.0], &[1.0]) - 0.3).abs() < 1e-15);
        for reg in regs() {
            let p = ProxSpec::new(reg, 0.6).unwrap();
            let y = [1.0, -0.1, 0.24, -3.0, 0.0];
            assert!(p.optimality_residual(&y, &p.apply(&y)) <= 1e-10);
        }
    }

    #[test]
    fn grid_search_oracle() {
        for reg in regs() {
            let p = ProxSpec::new(reg, 0.6).unwrap();
            for &y in &[-1.7, -0.3, -0.2, 0.0, 0.1, 0.24, 0.9, 1.6] {
                let (mut best_x, mut best_v) = (f64::NAN, f64::INFINITY);
                for k in 0..=40_000 {
                    let x = -2.0 + k as f64 * 1e-4;
                    let v = p.objective(&[y], &[x]);
                    if v < best_v {
                        best_v = v;
                        best_x = x;
                    }
                }
                assert!(
                    (best_x - p.apply_scalar(y)).abs() <= 1e-4,
                    "{reg:?} y={y}: grid {best_x} vs {}",
                    p.apply_scalar(y)
                );
            }
        }
    }

    proptest! {
        #[test]
        fn nonexpansive(
            a in prop::collection::vec(-5.0f64..5.0, 4),
            b in prop::collection::vec(-5.0f64..5.0, 4),
            step in 0.01f64..3.0,
        ) {
            for reg in regs() {
                let p = ProxSpec::new(reg, step).unwrap();
                let lhs = crate::linalg::dist(&p.apply(&a), &p.apply(&b));
                prop_assert!(lhs <= crate::linalg::dist(&a, &b) * (1.0 + 1e-12));
            }
        }

        #[test]
        fn dominates_perturbations(
            y in prop::collection::vec(-3.0f64..3.0, 3),
            dirs in prop::collection::vec(prop::collection::vec(-0.5f64..0.5, 3), 10),
        ) {
            for reg in regs() {
                let p = ProxSpec::new(reg, 0.4).unwrap();
                let x = p.apply(&y);
                let best = p.objective(&y, &x);
                prop_assert!(best <= p.objective(&y, &y) + 1e-12);
                for dir in &dirs {
                    let z: Vec<f64> = x.iter().zip(dir).map(|(a, b)| a + b).collect();
                    prop_assert!(best <= p.objective(&y, &z) + 1e-12);
                }
            }
        }

        #[test]
        fn separable(y in prop::collection::vec(-3.0f64..3.0, 1..8)) {
            for reg in regs() {
                let p = ProxSpec::new(reg, 0.9).unwrap();
                let whole = p.apply(&y);
                let parts: Vec<f64> = y.iter().map(|&v| p.apply(&[v])[0]).collect();
                prop_assert_eq!(whole, parts);
            }
        }
    }
}
