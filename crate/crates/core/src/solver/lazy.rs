//! Lazy sparse inner loop.
//!
//! Between two touches a coordinate `j` evolves by the same scalar map every
//! step, `x_j ↦ R(A x_j + B_j)`, where `A` and `B_j` collect the anchor
//! gradient, the folded ℓ2 term and the smooth part of `g`, and `R` is the
//! prox. Coordinates are therefore only brought up to date when a sampled row
//! touches them, and once more at the end of the epoch.

use crate::data::IndexSampler;
use crate::estimator::EstimatorState;
use crate::prox::soft_threshold;

use super::config::UpdateRule;
use super::correction_weight;
use super::svrg::{EpochOut, Inner};

/// `cᵗ`, `G(t) = Σ_{u<t} cᵘ` and `H(t) = Σ_{τ=1}^{t} G(τ)` for `t = 0..=m`.
///
/// After `t` steps of `x ↦ c x + d`, the value is `P(t)x + G(t)d` and the sum
/// of the `t` new values is `c·G(t)·x + H(t)·d`.
#[derive(Debug, Clone)]
pub struct AffineTables {
    power: Vec<f64>,
    geometric: Vec<f64>,
    cumulative: Vec<f64>,
}

impl AffineTables {
    pub fn new(c: f64, max_steps: usize) -> Self {
        let mut power = Vec::with_capacity(max_steps + 1);
        let mut geometric = Vec::with_capacity(max_steps + 1);
        let mut cumulative = Vec::with_capacity(max_steps + 1);
        power.push(1.0);
        geometric.push(0.0);
        cumulative.push(0.0);
        for t in 0..max_steps {
            power.push(power[t] * c);
            geometric.push(1.0 + c * geometric[t]);
            cumulative.push(cumulative[t] + geometric[t + 1]);
        }
        Self {
            power,
            geometric,
            cumulative,
        }
    }

    /// `(value after t steps, sum of the t new values)` starting from `x`.
    pub fn advance(&self, x: f64, offset: f64, t: usize) -> (f64, f64) {
        let g = self.geometric[t];
        // c·G(t) = G(t) − 1 + cᵗ
        let c_g = if t == 0 { 0.0 } else { g - 1.0 + self.power[t] };
        (self.power[t] * x + g * offset, c_g * x + self.cumulative[t] * offset)
    }
}

struct Replay {
    /// `A = 1 − η(λ_fold + λ_smooth)`
    a: f64,
    /// soft-threshold level `ηλ₂`
    threshold: f64,
    /// `1/(1 + ηλ₁)` from the prox
    shrink: f64,
    tables: Option<AffineTables>,
}

impl Replay {
    #[inline]
    fn step(&self, x: f64, b: f64) -> f64 {
        soft_threshold(self.a * x + b, self.threshold) * self.shrink
    }
}

pub(super) fn lazy_epoch(
    inner: &Inner,
    state: &EstimatorState,
    start: Vec<f64>,
    m: usize,
    eta: f64,
    sampler: &mut IndexSampler,
    counter: &mut u64,
) -> EpochOut {
    let obj = inner.obj;
    let n = obj.n_samples();
    let d = obj.dim();
    let l_fold = obj.folded_l2();
    let (l_smooth, l_prox, l1) = match inner.rule {
        UpdateRule::Smooth => (inner.residual.l2_weight(), 0.0, 0.0),
        UpdateRule::Proximal => (0.0, inner.residual.l2_weight(), inner.residual.l1_weight()),
    };
    let a = 1.0 - eta * (l_fold + l_smooth);
    let shrink = 1.0 / (1.0 + eta * l_prox);
    let threshold = eta * l1;
    let replay = Replay {
        a,
        threshold,
        shrink,
        tables: (threshold == 0.0).then(|| AffineTables::new(a * shrink, m)),
    };
    // B_j = −η(μ̃_j − λ_fold x̃_j)
    let offsets: Vec<f64> = state
        .anchor_gradient()
        .iter()
        .zip(state.snapshot())
        .map(|(mu, snap)| -eta * (mu - l_fold * snap))
        .collect();

    let mut x = start;
    let mut sum = vec![0.0; d];
    let mut last = vec![0usize; d];

    let catch_up = |j: usize, k: usize, x: &mut [f64], sum: &mut [f64], last: &mut [usize], counter: &mut u64| {
        let t = k - last[j];
        if t == 0 {
            return;
        }
        match &replay.tables {
            Some(tables) => {
                let (value, added) = tables.advance(x[j], offsets[j] * shrink, t);
                x[j] = value;
                sum[j] += added;
                *counter += 1;
            }
            None => {
                for _ in 0..t {
                    x[j] = replay.step(x[j], offsets[j]);
                    sum[j] += x[j];
                }
                *counter += t as u64;
            }
        }
        last[j] = k;
    };

    for k in 0..m {
        let i = sampler.sample();
        let row = obj.data().row(i);
        for (j, _) in row.iter() {
            catch_up(j, k, &mut x, &mut sum, &mut last, counter);
        }
        let w = correction_weight(inner.scheme, i, n);
        let coef = w * state.correction_scalar(obj, i, &x);
        for (j, v) in row.iter() {
            x[j] = replay.step(x[j], offsets[j] - eta * coef * v);
            sum[j] += x[j];
            last[j] = k + 1;
            *counter += 1;
        }
    }
    for j in 0..d {
        catch_up(j, m, &mut x, &mut sum, &mut last, counter);
    }
    EpochOut { last: x, sum }
}
