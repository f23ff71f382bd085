use crate::data::SamplingScheme;
use crate::error::SolverError;
use crate::model::Objective;

/// Every solver the crate implements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Average snapshot, last-iterate restart.
    VrSgd,
    /// VR-SGD with the snapshot/iterate convex-combination momentum.
    MomentumVrSgd,
    /// VR-SGD with growing epoch lengths.
    VrSgdPlusPlus,
    /// Last-iterate snapshot and restart.
    Svrg,
    /// Averaged snapshot and restart with proximal steps.
    ProxSvrg,
    Saga,
    /// Katyusha with gradient updates for the two auxiliary sequences.
    KatyushaI,
    /// Katyusha with proximal updates for both auxiliary sequences.
    KatyushaII,
    Gd,
    Agd,
    Apg,
    Sgd,
    Power,
    VrPca,
    /// VR-SGD on the unit-sphere leading-eigenvector problem.
    EigenVrSgd,
}

impl Algorithm {
    pub const ALL: [Algorithm; 15] = [
        Algorithm::VrSgd,
        Algorithm::MomentumVrSgd,
        Algorithm::VrSgdPlusPlus,
        Algorithm::Svrg,
        Algorithm::ProxSvrg,
        Algorithm::Saga,
        Algorithm::KatyushaI,
        Algorithm::KatyushaII,
        Algorithm::Gd,
        Algorithm::Agd,
        Algorithm::Apg,
        Algorithm::Sgd,
        Algorithm::Power,
        Algorithm::VrPca,
        Algorithm::EigenVrSgd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::VrSgd => "vr-sgd",
            Algorithm::MomentumVrSgd => "vr-sgd-momentum",
            Algorithm::VrSgdPlusPlus => "vr-sgd++",
            Algorithm::Svrg => "svrg",
            Algorithm::ProxSvrg => "prox-svrg",
            Algorithm::Saga => "saga",
            Algorithm::KatyushaI => "katyusha-i",
            Algorithm::KatyushaII => "katyusha-ii",
            Algorithm::Gd => "gd",
            Algorithm::Agd => "agd",
            Algorithm::Apg => "apg",
            Algorithm::Sgd => "sgd",
            Algorithm::Power => "power",
            Algorithm::VrPca => "vr-pca",
            Algorithm::EigenVrSgd => "eigen-vr-sgd",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        let name = name.trim().to_ascii_lowercase();
        if name == "katyusha" {
            return Some(Algorithm::KatyushaII);
        }
        Self::ALL.into_iter().find(|a| a.name() == name)
    }

    pub fn is_eigen(self) -> bool {
        matches!(self, Algorithm::Power | Algorithm::VrPca | Algorithm::EigenVrSgd)
    }

    /// Epoch-based methods that pay one anchor pass per epoch.
    pub fn is_epoch_based(self) -> bool {
        matches!(
            self,
            Algorithm::VrSgd
                | Algorithm::MomentumVrSgd
                | Algorithm::VrSgdPlusPlus
                | Algorithm::Svrg
                | Algorithm::ProxSvrg
                | Algorithm::KatyushaI
                | Algorithm::KatyushaII
                | Algorithm::VrPca
                | Algorithm::EigenVrSgd
        )
    }

    /// `m` when the config leaves it unset.
    pub fn default_epoch_length(self, n: usize) -> usize {
        match self {
            Algorithm::Gd | Algorithm::Agd | Algorithm::Apg | Algorithm::Power => 1,
            Algorithm::Saga | Algorithm::Sgd | Algorithm::VrPca | Algorithm::EigenVrSgd => n,
            _ => 2 * n,
        }
    }

    pub fn default_snapshot(self) -> SnapshotPolicy {
        match self {
            Algorithm::Svrg | Algorithm::VrPca => SnapshotPolicy::Last,
            Algorithm::ProxSvrg => SnapshotPolicy::Average,
            _ => SnapshotPolicy::AverageThenLast,
        }
    }
}

/// How the snapshot `x̃^s` and the next start `x^{s+1}_0` come out of an
/// epoch's iterates `x_1..x_m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnapshotPolicy {
    /// Both are `x_m`.
    Last,
    /// Both are the mean of `x_1..x_m`.
    Average,
    /// Snapshot is the mean of `x_1..x_m`, start is `x_m`.
    AverageThenLast,
    /// Snapshot is the mean of `x_1..x_{m−1}`, start is `x_m`.
    AverageExcludingLastThenLast,
}

impl SnapshotPolicy {
    pub fn name(self) -> &'static str {
        match self {
            SnapshotPolicy::Last => "last",
            SnapshotPolicy::Average => "average",
            SnapshotPolicy::AverageThenLast => "average-then-last",
            SnapshotPolicy::AverageExcludingLastThenLast => "average-excluding-last",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "last" | "i" => Some(SnapshotPolicy::Last),
            "average" | "ii" => Some(SnapshotPolicy::Average),
            "average-then-last" | "iii" => Some(SnapshotPolicy::AverageThenLast),
            "average-excluding-last" | "iii-ii" => Some(SnapshotPolicy::AverageExcludingLastThenLast),
            _ => None,
        }
    }

    pub(crate) fn min_epoch_length(self) -> usize {
        match self {
            SnapshotPolicy::AverageExcludingLastThenLast => 2,
            _ => 1,
        }
    }
}

/// Inner step form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateRule {
    /// `x ← x − η(estimate + ∇g(x))`; needs a differentiable `g`.
    Smooth,
    /// `x ← prox_{ηg}(x − η·estimate)`
    Proximal,
}

impl UpdateRule {
    pub fn name(self) -> &'static str {
        match self {
            UpdateRule::Smooth => "smooth",
            UpdateRule::Proximal => "proximal",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "smooth" | "gradient" => Some(UpdateRule::Smooth),
            "proximal" | "prox" => Some(UpdateRule::Proximal),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LrMode {
    Fixed,
    /// `η_s = η₀ / max{α, 2/(s+1)}`
    Varying,
}

impl LrMode {
    pub fn name(self) -> &'static str {
        match self {
            LrMode::Fixed => "fixed",
            LrMode::Varying => "varying",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fixed" => Some(LrMode::Fixed),
            "varying" => Some(LrMode::Varying),
            _ => None,
        }
    }
}

/// Start-point rule of the momentum variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentumOption {
    /// Restart `x` from the last iterate and pick `v₀` on the coupling line
    /// `x₀ = x̃ + w(v₀ − x̃)`. Reproduces plain VR-SGD steps exactly when
    /// `η_s = η₀/w_s`.
    I,
    /// Restart `x` from the last iterate with `v₀ = x₀`.
    ILiteral,
    /// Carry `v` across epochs and start from `x₀ = w v₀ + (1 − w)x̃`.
    II,
}

impl MomentumOption {
    pub fn name(self) -> &'static str {
        match self {
            MomentumOption::I => "I",
            MomentumOption::ILiteral => "I-literal",
            MomentumOption::II => "II",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "i" => Some(MomentumOption::I),
            "i-literal" => Some(MomentumOption::ILiteral),
            "ii" => Some(MomentumOption::II),
            _ => None,
        }
    }
}

/// Whether sparse data takes the lazy coordinate path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SparseMode {
    /// Lazy when rows are sparse, density is below 10% and `b = 1`.
    Auto,
    Dense,
    Lazy,
}

impl SparseMode {
    pub fn name(self) -> &'static str {
        match self {
            SparseMode::Auto => "auto",
            SparseMode::Dense => "dense",
            SparseMode::Lazy => "lazy",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "auto" => Some(SparseMode::Auto),
            "dense" => Some(SparseMode::Dense),
            "lazy" => Some(SparseMode::Lazy),
            _ => None,
        }
    }
}

/// How much of the run is kept in the record beyond the per-epoch rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum TraceLevel {
    Epochs,
    /// Also keep every snapshot and every epoch start point.
    Snapshots,
    /// Also keep every inner iterate (forces the dense path).
    Iterates,
}

/// Growing epoch lengths: `m_{s+1} = min(⌊ρ m_s⌋, m)` until `m` is reached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Growth {
    pub rho: f64,
    /// `m₁`; `⌊n/4⌋` when unset.
    pub initial: Option<usize>,
}

impl Default for Growth {
    fn default() -> Self {
        Self {
            rho: 1.75,
            initial: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KatyushaParams {
    /// Fixed `w₁`; when unset it is `min{√(mμ/(3L)), 0.5}` for strongly convex
    /// objectives and `min{2/(s+1), 0.5}` otherwise.
    pub w1: Option<f64>,
    pub w2: f64,
}

impl Default for KatyushaParams {
    fn default() -> Self {
        Self { w1: None, w2: 0.5 }
    }
}

/// One solver run's settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    /// `S`; for the full-gradient methods every epoch is one iteration.
    pub epochs: usize,
    /// `m`; the algorithm default when unset.
    pub epoch_length: Option<usize>,
    /// `η₀`. Katyusha derives its own step from `w₁` and ignores this.
    pub step: f64,
    /// Floor of the varying schedule and of the momentum weight.
    pub alpha: f64,
    /// Per-algorithm default when unset (varying for the momentum variant).
    pub lr_mode: Option<LrMode>,
    pub snapshot: Option<SnapshotPolicy>,
    /// Smooth when the non-folded regularizer is differentiable, else proximal.
    pub update_rule: Option<UpdateRule>,
    pub batch_size: usize,
    pub seed: u64,
    pub sampling: SamplingScheme,
    pub growth: Growth,
    pub momentum: MomentumOption,
    pub katyusha: KatyushaParams,
    pub sparse_mode: SparseMode,
    pub trace: TraceLevel,
    /// Initial point; zero (or a seeded random unit vector for eigen solvers).
    pub x0: Option<Vec<f64>>,
    /// Known optimal value, used for the gap column.
    pub f_star: Option<f64>,
}

impl SolverConfig {
    pub fn new(algorithm: Algorithm, step: f64) -> Self {
        Self {
            algorithm,
            epochs: 20,
            epoch_length: None,
            step,
            alpha: 0.2,
            lr_mode: None,
            snapshot: None,
            update_rule: None,
            batch_size: 1,
            seed: 0,
            sampling: SamplingScheme::Uniform,
            growth: Growth::default(),
            momentum: MomentumOption::I,
            katyusha: KatyushaParams::default(),
            sparse_mode: SparseMode::Auto,
            trace: TraceLevel::Epochs,
            x0: None,
            f_star: None,
        }
    }

    pub fn epochs(mut self, epochs: usize) -> Self {
        self.epochs = epochs;
        self
    }

    pub fn epoch_length(mut self, m: usize) -> Self {
        self.epoch_length = Some(m);
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn snapshot(mut self, policy: SnapshotPolicy) -> Self {
        self.snapshot = Some(policy);
        self
    }

    pub fn update_rule(mut self, rule: UpdateRule) -> Self {
        self.update_rule = Some(rule);
        self
    }

    pub fn lr_mode(mut self, mode: LrMode, alpha: f64) -> Self {
        self.lr_mode = Some(mode);
        self.alpha = alpha;
        self
    }

    pub fn batch_size(mut self, b: usize) -> Self {
        self.batch_size = b;
        self
    }

    pub fn trace(mut self, level: TraceLevel) -> Self {
        self.trace = level;
        self
    }

    pub fn sparse_mode(mut self, mode: SparseMode) -> Self {
        self.sparse_mode = mode;
        self
    }

    pub fn f_star(mut self, f_star: f64) -> Self {
        self.f_star = Some(f_star);
        self
    }

    pub fn x0(mut self, x0: Vec<f64>) -> Self {
        self.x0 = Some(x0);
        self
    }

    pub fn resolved_epoch_length(&self, n: usize) -> usize {
        self.epoch_length
            .unwrap_or_else(|| self.algorithm.default_epoch_length(n))
    }

    pub fn resolved_snapshot(&self) -> SnapshotPolicy {
        self.snapshot.unwrap_or_else(|| self.algorithm.default_snapshot())
    }

    pub fn resolved_lr_mode(&self) -> LrMode {
        self.lr_mode.unwrap_or(match self.algorithm {
            Algorithm::MomentumVrSgd => LrMode::Varying,
            _ => LrMode::Fixed,
        })
    }

    pub fn resolved_update_rule(&self, obj: &Objective) -> UpdateRule {
        self.update_rule.unwrap_or_else(|| match self.algorithm {
            Algorithm::ProxSvrg | Algorithm::KatyushaII | Algorithm::Apg => UpdateRule::Proximal,
            _ if obj.residual_regularizer().is_smooth() => UpdateRule::Smooth,
            _ => UpdateRule::Proximal,
        })
    }

    /// Step of epoch `s ≥ 1` under the configured schedule.
    pub fn step_for_epoch(&self, s: usize) -> f64 {
        match self.resolved_lr_mode() {
            LrMode::Fixed => self.step,
            LrMode::Varying => super::learning_rate(s, self.step, self.alpha),
        }
    }

    pub(crate) fn validate(&self, obj: &Objective) -> Result<(), SolverError> {
        let bad = |msg: String| Err(SolverError::Config(msg));
        let n = obj.n_samples();
        let d = obj.dim();
        if self.algorithm != Algorithm::KatyushaI
            && self.algorithm != Algorithm::KatyushaII
            && !(self.step.is_finite() && self.step > 0.0)
        {
            return bad(format!("step must be positive and finite, got {}", self.step));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad(format!("alpha must lie in (0, 1], got {}", self.alpha));
        }
        let m = self.resolved_epoch_length(n);
        if m == 0 {
            return bad("epoch length must be at least 1".into());
        }
        if self.algorithm_uses_snapshot_policy() {
            let min = self.resolved_snapshot().min_epoch_length();
            let shortest = if self.algorithm == Algorithm::VrSgdPlusPlus {
                self.growth_initial(n).min(m)
            } else {
                m
            };
            if shortest < min {
                return bad(format!(
                    "snapshot policy {} needs epochs of at least {min} steps",
                    self.resolved_snapshot().name()
                ));
            }
        }
        if self.batch_size == 0 || self.batch_size > n {
            return bad(format!("batch size {} outside [1, {n}]", self.batch_size));
        }
        if self.batch_size > 1 && !self.sampling.is_uniform() {
            return bad("weighted sampling supports only b = 1".into());
        }
        if self.batch_size > 1
            && !matches!(
                self.algorithm,
                Algorithm::VrSgd | Algorithm::VrSgdPlusPlus | Algorithm::Svrg | Algorithm::ProxSvrg
            )
        {
            return bad(format!("{} does not take mini-batches", self.algorithm.name()));
        }
        if let SamplingScheme::Weighted(w) = &self.sampling {
            if w.len() != n {
                return bad(format!("{} sampling weights for {n} samples", w.len()));
            }
            if self.algorithm == Algorithm::Saga {
                return bad("saga supports only uniform sampling".into());
            }
        }
        if self.update_rule == Some(UpdateRule::Smooth) && !obj.residual_regularizer().is_smooth() {
            return bad(
                "the smooth update rule needs a differentiable regularizer; fold the l2 part or use the proximal rule"
                    .into(),
            );
        }
        if self.algorithm == Algorithm::KatyushaI && !obj.residual_regularizer().is_smooth() {
            return bad("katyusha-i needs a differentiable regularizer".into());
        }
        if self.algorithm == Algorithm::VrSgdPlusPlus && !(self.growth.rho > 1.0 && self.growth.rho.is_finite()) {
            return bad(format!("growth factor must exceed 1, got {}", self.growth.rho));
        }
        if matches!(self.algorithm, Algorithm::KatyushaI | Algorithm::KatyushaII) {
            let KatyushaParams { w1, w2 } = self.katyusha;
            if !(0.0..1.0).contains(&w2) {
                return bad(format!("katyusha w2 must lie in [0, 1), got {w2}"));
            }
            if let Some(w1) = w1 {
                if !(w1 > 0.0 && w1 <= 1.0 && w1 + w2 <= 1.0 + 1e-15) {
                    return bad(format!("katyusha needs w1 in (0, 1] and w1 + w2 <= 1, got {w1} + {w2}"));
                }
            }
        }
        if let Some(x0) = &self.x0 {
            if x0.len() != d {
                return bad(format!("x0 has dimension {}, expected {d}", x0.len()));
            }
            if x0.iter().any(|v| !v.is_finite()) {
                return bad("x0 has non-finite entries".into());
            }
        }
        if self.sparse_mode == SparseMode::Lazy
            && (self.batch_size > 1 || self.trace == TraceLevel::Iterates || !self.algorithm_supports_lazy())
        {
            return bad("the lazy path needs b = 1, no iterate trace, and an SVRG-family algorithm".into());
        }
        Ok(())
    }

    pub(crate) fn growth_initial(&self, n: usize) -> usize {
        self.growth.initial.unwrap_or(n / 4).max(1)
    }

    fn algorithm_uses_snapshot_policy(&self) -> bool {
        matches!(
            self.algorithm,
            Algorithm::VrSgd
                | Algorithm::VrSgdPlusPlus
                | Algorithm::Svrg
                | Algorithm::ProxSvrg
                | Algorithm::VrPca
                | Algorithm::EigenVrSgd
        )
    }

    pub(crate) fn algorithm_supports_lazy(&self) -> bool {
        matches!(
            self.algorithm,
            Algorithm::VrSgd | Algorithm::VrSgdPlusPlus | Algorithm::Svrg | Algorithm::ProxSvrg
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(Algorithm::parse(a.name()), Some(a));
        }
        assert_eq!(Algorithm::parse("Katyusha"), Some(Algorithm::KatyushaII));
        assert_eq!(Algorithm::parse("nope"), None);
        for p in [
            SnapshotPolicy::Last,
            SnapshotPolicy::Average,
            SnapshotPolicy::AverageThenLast,
            SnapshotPolicy::AverageExcludingLastThenLast,
        ] {
            assert_eq!(SnapshotPolicy::parse(p.name()), Some(p));
        }
        for o in [MomentumOption::I, MomentumOption::ILiteral, MomentumOption::II] {
            assert_eq!(MomentumOption::parse(o.name()), Some(o));
        }
    }

    #[test]
    fn default_epoch_lengths() {
        assert_eq!(Algorithm::VrSgd.default_epoch_length(100), 200);
        assert_eq!(Algorithm::EigenVrSgd.default_epoch_length(100), 100);
        assert_eq!(Algorithm::VrPca.default_epoch_length(100), 100);
        assert_eq!(Algorithm::Gd.default_epoch_length(100), 1);
    }
}
