//! Composite objectives `F(x) = (1/n) Σ f_i(x) + g(x)` over linear models.
//!
//! Every component is `f_i(x) = ψ(a_iᵀx, b_i)` for a scalar link `ψ`,
//! optionally plus `(λ₁/2)‖x‖²` when the ℓ2 term is folded into the
//! components. The gradient of a component is therefore `ψ′(a_iᵀx, b_i)·a_i`
//! (+ `λ₁x`), which the estimators and the lazy solver path exploit.

use std::sync::Arc;

use crate::data::{Dataset, SamplingScheme};
use crate::error::ModelError;
use crate::linalg;

/// The scalar link `ψ(z, b)` of a linear-model loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossKind {
    /// `log(1 + exp(−b z))`
    Logistic,
    /// `(z − b)² / 2`
    Squared,
    /// `1 / (1 + exp(b z))`, non-convex.
    Sigmoid,
    /// `−z²`; the components of the leading-eigenvector problem.
    EigenQuadratic,
}

/// `1/(6√3)`, the maximum of `|σ''|` for the logistic sigmoid.
pub const SIGMOID_CURVATURE: f64 = 0.096_225_044_864_937_63;

impl LossKind {
    pub fn name(self) -> &'static str {
        match self {
            LossKind::Logistic => "logistic",
            LossKind::Squared => "squared",
            LossKind::Sigmoid => "sigmoid",
            LossKind::EigenQuadratic => "eigen",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "logistic" => Some(LossKind::Logistic),
            "squared" | "ridge" | "lasso" => Some(LossKind::Squared),
            "sigmoid" => Some(LossKind::Sigmoid),
            "eigen" => Some(LossKind::EigenQuadratic),
            _ => None,
        }
    }

    fn needs_binary_labels(self) -> bool {
        matches!(self, LossKind::Logistic | LossKind::Sigmoid)
    }

    pub fn value(self, z: f64, b: f64) -> f64 {
        match self {
            LossKind::Logistic => {
                let t = -b * z;
                if t > 0.0 {
                    t + (-t).exp().ln_1p()
                } else {
                    t.exp().ln_1p()
                }
            }
            LossKind::Squared => 0.5 * (z - b) * (z - b),
            LossKind::Sigmoid => logistic_sigmoid(-b * z),
            LossKind::EigenQuadratic => -z * z,
        }
    }

    /// `∂ψ/∂z`
    pub fn derivative(self, z: f64, b: f64) -> f64 {
        match self {
            LossKind::Logistic => -b * logistic_sigmoid(-b * z),
            LossKind::Squared => z - b,
            LossKind::Sigmoid => {
                let s = logistic_sigmoid(-b * z);
                -b * s * (1.0 - s)
            }
            LossKind::EigenQuadratic => -2.0 * z,
        }
    }

    /// Bound on `|∂²ψ/∂z²|` for `b ∈ {±1}`.
    pub fn curvature_bound(self) -> f64 {
        match self {
            LossKind::Logistic => 0.25,
            LossKind::Squared => 1.0,
            LossKind::Sigmoid => SIGMOID_CURVATURE,
            LossKind::EigenQuadratic => 2.0,
        }
    }
}

/// `1 / (1 + exp(−t))` without overflow.
fn logistic_sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// The regularizer `g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regularizer {
    None,
    /// `(λ₁/2)‖x‖²`
    L2(f64),
    /// `λ₂‖x‖₁`
    L1(f64),
    /// `(λ₁/2)‖x‖² + λ₂‖x‖₁`
    ElasticNet {
        l2: f64,
        l1: f64,
    },
}

impl Regularizer {
    /// Builds the simplest variant carrying the given weights.
    pub fn from_weights(l2: f64, l1: f64) -> Result<Self, ModelError> {
        for w in [l2, l1] {
            if !(w.is_finite() && w >= 0.0) {
                return Err(ModelError::InvalidWeight(w));
            }
        }
        Ok(match (l2 > 0.0, l1 > 0.0) {
            (false, false) => Regularizer::None,
            (true, false) => Regularizer::L2(l2),
            (false, true) => Regularizer::L1(l1),
            (true, true) => Regularizer::ElasticNet { l2, l1 },
        })
    }

    /// `λ₁`, the ℓ2 weight.
    pub fn l2_weight(&self) -> f64 {
        match *self {
            Regularizer::L2(l) | Regularizer::ElasticNet { l2: l, .. } => l,
            _ => 0.0,
        }
    }

    /// `λ₂`, the ℓ1 weight.
    pub fn l1_weight(&self) -> f64 {
        match *self {
            Regularizer::L1(l) | Regularizer::ElasticNet { l1: l, .. } => l,
            _ => 0.0,
        }
    }

    /// Differentiable everywhere (no ℓ1 part).
    pub fn is_smooth(&self) -> bool {
        self.l1_weight() == 0.0
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let (l2, l1) = (self.l2_weight(), self.l1_weight());
        let mut v = 0.0;
        if l2 > 0.0 {
            v += 0.5 * l2 * linalg::norm_sq(x);
        }
        if l1 > 0.0 {
            v += l1 * x.iter().map(|t| t.abs()).sum::<f64>();
        }
        v
    }

    /// Adds `∇g(x)` to `out`. Only the ℓ2 part has a gradient; callers check
    /// [`Regularizer::is_smooth`] first.
    pub fn add_gradient(&self, x: &[f64], out: &mut [f64]) {
        let l2 = self.l2_weight();
        if l2 > 0.0 {
            linalg::axpy(l2, x, out);
        }
    }

    fn validate(&self) -> Result<(), ModelError> {
        Self::from_weights(self.l2_weight(), self.l1_weight()).map(|_| ())
    }
}

/// A composite objective over a shared dataset.
#[derive(Debug, Clone)]
pub struct Objective {
    data: Arc<Dataset>,
    loss: LossKind,
    reg: Regularizer,
    fold_l2: bool,
}

impl Objective {
    /// Labels must be `±1` for the logistic and sigmoid losses; the
    /// eigen-quadratic loss takes no regularizer.
    pub fn new(data: Arc<Dataset>, loss: LossKind, reg: Regularizer) -> Result<Self, ModelError> {
        reg.validate()?;
        if loss.needs_binary_labels() {
            if let Some((row, &label)) = data.labels().iter().enumerate().find(|(_, &b)| b != 1.0 && b != -1.0) {
                return Err(ModelError::NonBinaryLabel {
                    row,
                    label,
                    loss: loss.name(),
                });
            }
        }
        if loss == LossKind::EigenQuadratic && reg != Regularizer::None {
            return Err(ModelError::RegularizedEigen);
        }
        Ok(Self {
            data,
            loss,
            reg,
            fold_l2: false,
        })
    }

    /// Moves the ℓ2 part of `g` into every component `f_i`.
    pub fn with_folded_l2(mut self, fold: bool) -> Self {
        self.fold_l2 = fold;
        self
    }

    pub fn data(&self) -> &Arc<Dataset> {
        &self.data
    }

    pub fn loss(&self) -> LossKind {
        self.loss
    }

    pub fn regularizer(&self) -> Regularizer {
        self.reg
    }

    pub fn is_l2_folded(&self) -> bool {
        self.fold_l2
    }

    pub fn n_samples(&self) -> usize {
        self.data.n_samples()
    }

    pub fn dim(&self) -> usize {
        self.data.n_features()
    }

    /// The ℓ2 weight carried by the components (0 unless folded).
    pub fn folded_l2(&self) -> f64 {
        if self.fold_l2 {
            self.reg.l2_weight()
        } else {
            0.0
        }
    }

    /// The part of `g` that is not folded into the components.
    pub fn residual_regularizer(&self) -> Regularizer {
        if self.fold_l2 {
            Regularizer::from_weights(0.0, self.reg.l1_weight()).expect("validated weights")
        } else {
            self.reg
        }
    }

    /// `a_iᵀx`
    pub fn margin(&self, i: usize, x: &[f64]) -> f64 {
        self.data.row(i).dot(x)
    }

    /// `ψ′(z, b_i)`
    pub fn link_derivative(&self, i: usize, z: f64) -> f64 {
        self.loss.derivative(z, self.data.label(i))
    }

    /// `ψ′(a_iᵀx, b_i)`, the scalar that scales `a_i` in `∇f_i(x)`.
    pub fn component_scalar(&self, i: usize, x: &[f64]) -> f64 {
        self.link_derivative(i, self.margin(i, x))
    }

    pub fn component_value(&self, i: usize, x: &[f64]) -> f64 {
        let mut v = self.loss.value(self.margin(i, x), self.data.label(i));
        let l2 = self.folded_l2();
        if l2 > 0.0 {
            v += 0.5 * l2 * linalg::norm_sq(x);
        }
        v
    }

    /// `∇f_i(x)`
    pub fn component_gradient(&self, i: usize, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim()];
        self.add_component_gradient(i, x, 1.0, &mut g);
        g
    }

    /// `out += scale · ∇f_i(x)`
    pub fn add_component_gradient(&self, i: usize, x: &[f64], scale: f64, out: &mut [f64]) {
        let s = self.component_scalar(i, x);
        self.data.row(i).axpy(scale * s, out);
        let l2 = self.folded_l2();
        if l2 > 0.0 {
            linalg::axpy(scale * l2, x, out);
        }
    }

    /// `f(x) = (1/n) Σ f_i(x)`
    pub fn smooth_value(&self, x: &[f64]) -> f64 {
        let n = self.n_samples();
        let loss: f64 = (0..n)
            .map(|i| self.loss.value(self.margin(i, x), self.data.label(i)))
            .sum::<f64>()
            / n as f64;
        let l2 = self.folded_l2();
        if l2 > 0.0 {
            loss + 0.5 * l2 * linalg::norm_sq(x)
        } else {
            loss
        }
    }

    /// `F(x) = f(x) + g(x)`; independent of whether ℓ2 is folded.
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.smooth_value(x) + self.residual_regularizer().value(x)
    }

    /// `∇f(x)`, summed in sample order.
    pub fn smooth_gradient(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n_samples();
        let mut g = vec![0.0; self.dim()];
        for i in 0..n {
            let s = self.component_scalar(i, x);
            self.data.row(i).axpy(s, &mut g);
        }
        linalg::scale(1.0 / n as f64, &mut g);
        let l2 = self.folded_l2();
        if l2 > 0.0 {
            linalg::axpy(l2, x, &mut g);
        }
        g
    }

    /// `∇F(x)` when `g` is smooth, `None` when it has an ℓ1 part.
    pub fn objective_gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let residual = self.residual_regularizer();
        if !residual.is_smooth() {
            return None;
        }
        let mut g = self.smooth_gradient(x);
        residual.add_gradient(x, &mut g);
        Some(g)
    }

    /// `L_i = c_ψ ‖a_i‖²` (+ folded `λ₁`).
    pub fn component_smoothness(&self, i: usize) -> f64 {
        let norm = self.data.row_norms()[i];
        self.loss.curvature_bound() * norm * norm + self.folded_l2()
    }

    /// `L = max_i L_i`.
    pub fn smoothness_constant(&self) -> f64 {
        (0..self.n_samples())
            .map(|i| self.component_smoothness(i))
            .fold(0.0, f64::max)
    }

    /// `μ`: the ℓ2 weight when present, otherwise zero.
    pub fn strong_convexity(&self) -> f64 {
        self.reg.l2_weight()
    }

    /// Sampling probabilities proportional to `L_i`.
    pub fn lipschitz_sampling(&self) -> Result<SamplingScheme, crate::error::DataError> {
        let scores: Vec<f64> = (0..self.n_samples()).map(|i| self.component_smoothness(i)).collect();
        SamplingScheme::proportional_to(&scores)
    }
}
