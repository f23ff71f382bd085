use super::config::{Algorithm, SolverConfig};

/// One row of a convergence trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochEntry {
    /// 1-based epoch (or iteration, for full-gradient methods).
    pub epoch: usize,
    /// Cumulative effective passes over the data.
    pub effective_passes: f64,
    /// Cumulative seconds on a monotonic clock.
    pub wall_seconds: f64,
    /// `F` at the epoch's reported point.
    pub objective: f64,
    /// `F − F*` when the optimum is known.
    pub gap: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Completed,
    /// The objective left the finite range or grew past the guard at `epoch`.
    Diverged {
        epoch: usize,
    },
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub config: SolverConfig,
    pub initial_objective: f64,
    pub entries: Vec<EpochEntry>,
    /// `m_s` actually used per epoch.
    pub epoch_lengths: Vec<usize>,
    /// `x̂`
    pub final_x: Vec<f64>,
    pub final_objective: f64,
    pub status: RunStatus,
    /// Scalar coordinate writes performed by the inner loops.
    pub coordinate_updates: u64,
    pub used_lazy: bool,
    /// `x̃^1..x̃^S` (trace level `Snapshots` or finer).
    pub snapshots: Vec<Vec<f64>>,
    /// `x^1_0..x^S_0` (trace level `Snapshots` or finer).
    pub start_points: Vec<Vec<f64>>,
    /// Inner iterates in order, epoch by epoch (trace level `Iterates`).
    pub iterates: Vec<Vec<f64>>,
}

impl RunRecord {
    pub fn algorithm(&self) -> Algorithm {
        self.config.algorithm
    }

    pub fn seed(&self) -> u64 {
        self.config.seed
    }

    pub fn diverged(&self) -> bool {
        matches!(self.status, RunStatus::Diverged { .. })
    }

    pub fn objectives(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.objective).collect()
    }

    pub fn gaps(&self) -> Option<Vec<f64>> {
        self.entries.iter().map(|e| e.gap).collect()
    }

    /// `gap_{s+1}/gap_s` for consecutive epochs; `None` without gaps.
    pub fn gap_ratios(&self) -> Option<Vec<f64>> {
        let gaps = self.gaps()?;
        Some(gaps.windows(2).map(|w| w[1] / w[0]).collect())
    }

    /// First cumulative pass count at which the gap is at most `tol`.
    pub fn passes_to_tolerance(&self, tol: f64) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.gap.is_some_and(|g| g <= tol))
            .map(|e| e.effective_passes)
    }

    pub fn seconds_to_tolerance(&self, tol: f64) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.gap.is_some_and(|g| g <= tol))
            .map(|e| e.wall_seconds)
    }

    /// `log₁₀((F − F*)/|F*|)` per epoch, the eigen solvers' relative error.
    pub fn relative_errors(&self) -> Option<Vec<f64>> {
        let f_star = self.config.f_star?;
        let scale = f_star.abs();
        self.entries
            .iter()
            .map(|e| e.gap.map(|g| (g.max(0.0) / scale).log10()))
            .collect()
    }
}
