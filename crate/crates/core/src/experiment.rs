//! File-driven experiment runner: flat `key = value` configs in, CSV traces
//! and a summary table out.
//!
//! See the repository README for the full config grammar.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::data::{parse_libsvm, synthetic, Dataset, SamplingScheme};
use crate::diagnostics::ridge_closed_form;
use crate::error::ExperimentError;
use crate::model::{LossKind, Objective, Regularizer};
use crate::solver::{
    self, Algorithm, EpochEntry, LrMode, MomentumOption, RunRecord, SnapshotPolicy, SolverConfig, SparseMode,
    UpdateRule,
};

/// Column names of every trace file, in order.
pub const TRACE_HEADER: &str = "epoch,effective_passes,wall_seconds,objective,gap";

/// Column names of the summary file.
pub const SUMMARY_HEADER: &str =
    "solver,algorithm,seed,status,epochs_run,final_objective,final_gap,tolerance,passes_to_tolerance,seconds_to_tolerance";

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    /// A LIBSVM file; `n_features` overrides the inferred dimension.
    File {
        path: PathBuf,
        n_features: Option<usize>,
    },
    Synthetic(SyntheticSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticKind {
    Ridge,
    Classification,
    Sparse,
}

impl SyntheticKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ridge" => Some(SyntheticKind::Ridge),
            "classification" => Some(SyntheticKind::Classification),
            "sparse" => Some(SyntheticKind::Sparse),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub kind: SyntheticKind,
    pub n: usize,
    pub d: usize,
    pub seed: u64,
    /// Fraction of nonzero features per row (sparse kind only).
    pub density: f64,
}

impl SyntheticSpec {
    pub fn generate(&self) -> Result<Dataset, ExperimentError> {
        Ok(match self.kind {
            SyntheticKind::Ridge => synthetic::ridge(self.n, self.d, self.seed)?,
            SyntheticKind::Classification => synthetic::classification(self.n, self.d, self.seed)?,
            SyntheticKind::Sparse => synthetic::sparse_classification(self.n, self.d, self.density, self.seed)?,
        })
    }
}

/// Where the optimal value for the gap column comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FStarMode {
    None,
    /// Closed-form ridge solution; needs the squared loss without ℓ1.
    RidgeOracle,
    /// Lowest objective seen over every run extended `factor`×.
    BestOfLongRun {
        factor: usize,
    },
    Value(f64),
}

/// How a solver entry's step is given.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSpec {
    Absolute(f64),
    /// `η = value / L`, with `L` the smoothness constant of `f_i + g`.
    OverL(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverEntry {
    pub label: String,
    pub step: StepSpec,
    /// Template; the seed and step are filled in per run.
    pub config: SolverConfig,
    /// Use `L_i`-proportional sampling instead of uniform.
    pub lipschitz_sampling: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub data: DataSource,
    pub normalize: bool,
    pub loss: LossKind,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Fold the ℓ2 term into the components; defaults to `lambda2 > 0`.
    pub fold_l2: Option<bool>,
    pub f_star: FStarMode,
    pub output_dir: PathBuf,
    pub repetitions: usize,
    /// Run `r` uses seed `seed + r`.
    pub seed: u64,
    pub tolerances: Vec<f64>,
    pub solvers: Vec<SolverEntry>,
}

fn config_err(line: usize, message: impl Into<String>) -> ExperimentError {
    ExperimentError::Config {
        line,
        message: message.into(),
    }
}

fn parse_num<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T, ExperimentError> {
    value
        .parse()
        .map_err(|_| config_err(line, format!("{key}: cannot parse {value:?}")))
}

fn parse_bool(line: usize, key: &str, value: &str) -> Result<bool, ExperimentError> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(config_err(
            line,
            format!("{key}: expected true or false, got {value:?}"),
        )),
    }
}

impl ExperimentConfig {
    /// Reads a config file; relative paths inside resolve against its directory.
    pub fn from_file(path: &Path) -> Result<Self, ExperimentError> {
        let text = fs::read_to_string(path).map_err(|source| ExperimentError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, path.parent())
    }

    pub fn parse(text: &str, base_dir: Option<&Path>) -> Result<Self, ExperimentError> {
        let resolve = |p: &str| {
            let p = PathBuf::from(p);
            match base_dir {
                Some(base) if p.is_relative() => base.join(p),
                _ => p,
            }
        };
        let mut seen = BTreeMap::new();
        let mut solver_keys: BTreeMap<usize, Vec<(usize, String, String)>> = BTreeMap::new();

        let mut dataset = None;
        let mut n_features = None;
        let mut synth_kind = None;
        let (mut synth_n, mut synth_d, mut synth_seed, mut synth_density) = (None, None, 0u64, 0.01);
        let mut normalize = true;
        let mut loss = None;
        let (mut lambda1, mut lambda2) = (0.0, 0.0);
        let mut fold_l2 = None;
        let mut f_star_raw = None;
        let mut long_run_factor = 5usize;
        let mut output_dir = None;
        let mut repetitions = 1usize;
        let mut seed = 0u64;
        let mut tolerances = vec![1e-8];

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| config_err(line, format!("expected key = value, got {content:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || value.is_empty() {
                return Err(config_err(line, "empty key or value"));
            }
            if let Some(prev) = seen.insert(key.to_string(), line) {
                return Err(config_err(line, format!("{key} already set on line {prev}")));
            }
            if let Some(rest) = key.strip_prefix("solver.") {
                let (index, field) = rest
                    .split_once('.')
                    .ok_or_else(|| config_err(line, format!("expected solver.<i>.<key>, got {key}")))?;
                let index: usize = parse_num(line, key, index)?;
                solver_keys
                    .entry(index)
                    .or_default()
                    .push((line, field.to_string(), value.to_string()));
                continue;
            }
            match key {
                "dataset" => dataset = Some(resolve(value)),
                "n_features" => n_features = Some(parse_num(line, key, value)?),
                "synthetic.kind" => {
                    synth_kind = Some(
                        SyntheticKind::parse(value)
                            .ok_or_else(|| config_err(line, format!("unknown synthetic kind {value:?}")))?,
                    )
                }
                "synthetic.n" => synth_n = Some(parse_num(line, key, value)?),
                "synthetic.d" => synth_d = Some(parse_num(line, key, value)?),
                "synthetic.seed" => synth_seed = parse_num(line, key, value)?,
                "synthetic.density" => synth_density = parse_num(line, key, value)?,
                "normalize" => normalize = parse_bool(line, key, value)?,
                "loss" => {
                    loss = Some(
                        LossKind::parse(value).ok_or_else(|| config_err(line, format!("unknown loss {value:?}")))?,
                    )
                }
                "lambda1" => lambda1 = parse_num(line, key, value)?,
                "lambda2" => lambda2 = parse_num(line, key, value)?,
                "fold_l2" => fold_l2 = Some(parse_bool(line, key, value)?),
                "f_star" => f_star_raw = Some((line, value.to_string())),
                "long_run_factor" => long_run_factor = parse_num(line, key, value)?,
                "output" => output_dir = Some(resolve(value)),
                "repetitions" => repetitions = parse_num(line, key, value)?,
                "seed" => seed = parse_num(line, key, value)?,
                "tolerance" => {
                    tolerances = value
                        .split(',')
                        .map(|t| parse_num(line, key, t.trim()))
                        .collect::<Result<_, _>>()?
                }
                _ => return Err(config_err(line, format!("unknown key {key}"))),
            }
        }

        let data = match (dataset, synth_kind) {
            (Some(path), None) => DataSource::File { path, n_features },
            (None, Some(kind)) => DataSource::Synthetic(SyntheticSpec {
                kind,
                n: synth_n.ok_or_else(|| ExperimentError::Invalid("synthetic.n is required".into()))?,
                d: synth_d.ok_or_else(|| ExperimentError::Invalid("synthetic.d is required".into()))?,
                seed: synth_seed,
                density: synth_density,
            }),
            (Some(_), Some(_)) => {
                return Err(ExperimentError::Invalid(
                    "set either dataset or synthetic.kind, not both".into(),
                ))
            }
            (None, None) => return Err(ExperimentError::Invalid("no dataset given".into())),
        };
        if long_run_factor < 1 {
            return Err(ExperimentError::Invalid("long_run_factor must be at least 1".into()));
        }
        let f_star = match f_star_raw {
            None => FStarMode::None,
            Some((line, v)) => match v.as_str() {
                "none" => FStarMode::None,
                "ridge-oracle" => FStarMode::RidgeOracle,
                "best-of-long-run" => FStarMode::BestOfLongRun {
                    factor: long_run_factor,
                },
                other => FStarMode::Value(
                    other
                        .parse()
                        .map_err(|_| config_err(line, format!("f_star: unknown mode {other:?}")))?,
                ),
            },
        };

        let mut solvers = Vec::with_capacity(solver_keys.len());
        for (index, fields) in solver_keys {
            solvers.push(parse_solver(index, &fields)?);
        }
        let cfg = Self {
            data,
            normalize,
            loss: loss.unwrap_or(LossKind::Logistic),
            lambda1,
            lambda2,
            fold_l2,
            f_star,
            output_dir: output_dir.ok_or_else(|| ExperimentError::Invalid("output is required".into()))?,
            repetitions,
            seed,
            tolerances,
            solvers,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.solvers.is_empty() {
            return Err(ExperimentError::Invalid("at least one solver entry is required".into()));
        }
        if self.repetitions == 0 {
            return Err(ExperimentError::Invalid("repetitions must be at least 1".into()));
        }
        if self.tolerances.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(ExperimentError::Invalid("tolerances must be positive".into()));
        }
        let mut labels: Vec<&str> = self.solvers.iter().map(|s| s.label.as_str()).collect();
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(ExperimentError::Invalid("solver names must be unique".into()));
        }
        Ok(())
    }

    pub fn load_dataset(&self) -> Result<Dataset, ExperimentError> {
        let ds = match &self.data {
            DataSource::File { path, n_features } => {
                let text = fs::read_to_string(path).map_err(|source| ExperimentError::Io {
                    path: path.display().to_string(),
                    source,
                })?;
                parse_libsvm(&text, *n_features)?
            }
            DataSource::Synthetic(spec) => spec.generate()?,
        };
        Ok(if self.normalize { ds.normalize_rows() } else { ds })
    }

    pub fn build_objective(&self, ds: Arc<Dataset>) -> Result<Objective, ExperimentError> {
        let reg = if self.loss == LossKind::EigenQuadratic {
            Regularizer::None
        } else {
            Regularizer::from_weights(self.lambda1, self.lambda2)?
        };
        let fold = self.fold_l2.unwrap_or(self.lambda2 > 0.0);
        Ok(Objective::new(ds, self.loss, reg)?.with_folded_l2(fold))
    }
}

fn parse_solver(index: usize, fields: &[(usize, String, String)]) -> Result<SolverEntry, ExperimentError> {
    let algorithm = fields
        .iter()
        .find(|(_, k, _)| k == "algorithm")
        .ok_or_else(|| ExperimentError::Invalid(format!("solver.{index}.algorithm is required")))
        .and_then(|(line, _, v)| {
            Algorithm::parse(v).ok_or_else(|| config_err(*line, format!("unknown algorithm {v:?}")))
        })?;
    let mut config = SolverConfig::new(algorithm, 1.0);
    let mut label = format!("{}-{index}", algorithm.name());
    let mut step = None;
    let mut lipschitz_sampling = false;
    for (line, key, value) in fields {
        let line = *line;
        let (key, value) = (key.as_str(), value.as_str());
        let choice = |ok: bool| {
            if ok {
                Ok(())
            } else {
                Err(config_err(line, format!("{key}: unknown value {value:?}")))
            }
        };
        match key {
            "algorithm" => {}
            "name" => {
                if !value.chars().all(|c| c.is_ascii_alphanumeric() || "-_+.".contains(c)) {
                    return Err(config_err(line, "name may only use letters, digits and -_+."));
                }
                label = value.to_string();
            }
            "step" => step = Some(StepSpec::Absolute(parse_num(line, key, value)?)),
            "step_over_l" => step = Some(StepSpec::OverL(parse_num(line, key, value)?)),
            "epochs" => config.epochs = parse_num(line, key, value)?,
            "epoch_length" => config.epoch_length = Some(parse_num(line, key, value)?),
            "alpha" => config.alpha = parse_num(line, key, value)?,
            "lr_mode" => {
                config.lr_mode = LrMode::parse(value);
                choice(config.lr_mode.is_some())?
            }
            "snapshot" => {
                config.snapshot = SnapshotPolicy::parse(value);
                choice(config.snapshot.is_some())?
            }
            "update_rule" => {
                config.update_rule = UpdateRule::parse(value);
                choice(config.update_rule.is_some())?
            }
            "batch" => config.batch_size = parse_num(line, key, value)?,
            "sampling" => match value {
                "uniform" => lipschitz_sampling = false,
                "lipschitz" => lipschitz_sampling = true,
                _ => choice(false)?,
            },
            "rho" => config.growth.rho = parse_num(line, key, value)?,
            "m1" => config.growth.initial = Some(parse_num(line, key, value)?),
            "momentum" => {
                let opt = MomentumOption::parse(value);
                choice(opt.is_some())?;
                config.momentum = opt.expect("checked");
            }
            "w1" => config.katyusha.w1 = Some(parse_num(line, key, value)?),
            "w2" => config.katyusha.w2 = parse_num(line, key, value)?,
            "sparse" => {
                let mode = SparseMode::parse(value);
                choice(mode.is_some())?;
                config.sparse_mode = mode.expect("checked");
            }
            _ => return Err(config_err(line, format!("unknown solver key {key}"))),
        }
    }
    let step = match (step, algorithm) {
        (Some(s), _) => s,
        (None, Algorithm::KatyushaI | Algorithm::KatyushaII) => StepSpec::Absolute(1.0),
        (None, _) => {
            return Err(ExperimentError::Invalid(format!(
                "solver.{index} needs step or step_over_l"
            )))
        }
    };
    Ok(SolverEntry {
        label,
        step,
        config,
        lipschitz_sampling,
    })
}

/// `L` of `f_i + g`: the components' bound plus any smooth ℓ2 left in `g`.
pub fn objective_smoothness(obj: &Objective) -> f64 {
    obj.smoothness_constant() + obj.residual_regularizer().l2_weight()
}

/// One finished (solver, seed) run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub label: String,
    pub seed: u64,
    pub record: RunRecord,
    pub trace_path: PathBuf,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub f_star: Option<f64>,
    pub runs: Vec<RunOutcome>,
    pub summary_path: PathBuf,
}

impl ExperimentReport {
    pub fn runs_for<'a>(&'a self, label: &'a str) -> impl Iterator<Item = &'a RunOutcome> + 'a {
        self.runs.iter().filter(move |r| r.label == label)
    }
}

fn solver_config(
    entry: &SolverEntry,
    obj: &Objective,
    seed: u64,
    epochs: usize,
) -> Result<SolverConfig, ExperimentError> {
    let mut cfg = entry.config.clone();
    cfg.seed = seed;
    cfg.epochs = epochs;
    cfg.step = match entry.step {
        StepSpec::Absolute(s) => s,
        StepSpec::OverL(c) => c / objective_smoothness(obj),
    };
    if entry.lipschitz_sampling {
        cfg.sampling = obj.lipschitz_sampling()?;
    } else {
        cfg.sampling = SamplingScheme::Uniform;
    }
    Ok(cfg)
}

fn seeds(cfg: &ExperimentConfig) -> impl Iterator<Item = u64> + '_ {
    (0..cfg.repetitions as u64).map(move |r| cfg.seed.wrapping_add(r))
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Runs every (solver, seed) pair, writes one trace per run and the summary.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    cfg.validate()?;
    let ds = Arc::new(cfg.load_dataset()?);
    let obj = cfg.build_objective(ds.clone())?;

    let f_star = match cfg.f_star {
        FStarMode::None => None,
        FStarMode::Value(v) => Some(v),
        FStarMode::RidgeOracle => {
            if cfg.loss != LossKind::Squared || cfg.lambda2 != 0.0 {
                return Err(ExperimentError::Invalid(
                    "ridge-oracle needs the squared loss without an l1 term".into(),
                ));
            }
            let x = ridge_closed_form(&ds, cfg.lambda1)?;
            Some(obj.objective_value(&x))
        }
        FStarMode::BestOfLongRun { factor } => {
            let mut best = f64::INFINITY;
            for entry in &cfg.solvers {
                for seed in seeds(cfg) {
                    let sc = solver_config(entry, &obj, seed, entry.config.epochs * factor)?;
                    let rec = solver::run(&sc, &obj)?;
                    for v in rec.objectives().into_iter().chain([rec.final_objective]) {
                        if v.is_finite() && v < best {
                            best = v;
                        }
                    }
                }
            }
            best.is_finite().then_some(best)
        }
    };

    fs::create_dir_all(&cfg.output_dir).map_err(io_err(&cfg.output_dir))?;
    let mut runs = Vec::new();
    for entry in &cfg.solvers {
        for seed in seeds(cfg) {
            let mut sc = solver_config(entry, &obj, seed, entry.config.epochs)?;
            sc.f_star = f_star;
            let record = solver::run(&sc, &obj)?;
            let trace_path = cfg.output_dir.join(format!("{}_seed{seed}.csv", entry.label));
            emit_csv(&record, &trace_path)?;
            runs.push(RunOutcome {
                label: entry.label.clone(),
                seed,
                record,
                trace_path,
            });
        }
    }

    let summary_path = cfg.output_dir.join("summary.csv");
    fs::write(&summary_path, format_summary(&runs, &cfg.tolerances)).map_err(io_err(&summary_path))?;
    Ok(ExperimentReport {
        f_star,
        runs,
        summary_path,
    })
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn format_summary(runs: &[RunOutcome], tolerances: &[f64]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
    for run in runs {
        let rec = &run.record;
        let status = if rec.diverged() { "diverged" } else { "completed" };
        let final_gap = rec.entries.last().and_then(|e| e.gap);
        for &tol in tolerances {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                run.label,
                rec.algorithm().name(),
                run.seed,
                status,
                rec.entries.len(),
                num(rec.final_objective),
                opt(final_gap),
                num(tol),
                opt(rec.passes_to_tolerance(tol)),
                opt(rec.seconds_to_tolerance(tol)),
            );
        }
    }
    out
}

/// The trace as CSV text: header plus one row per epoch, 17 significant
/// digits, empty gap cells when the optimum is unknown.
pub fn format_trace(record: &RunRecord) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for e in &record.entries {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            e.epoch,
            num(e.effective_passes),
            num(e.wall_seconds),
            num(e.objective),
            e.gap.map(num).unwrap_or_default()
        );
    }
    out
}

pub fn emit_csv(record: &RunRecord, path: &Path) -> Result<(), ExperimentError> {
    fs::write(path, format_trace(record)).map_err(io_err(path))
}

/// Reads a trace written by [`format_trace`].
pub fn parse_trace_csv(text: &str) -> Result<Vec<EpochEntry>, ExperimentError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == TRACE_HEADER => {}
        _ => {
            return Err(ExperimentError::Trace {
                line: 1,
                message: format!("expected header {TRACE_HEADER}"),
            })
        }
    }
    let mut entries = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| ExperimentError::Trace { line: line_no, message };
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 5 {
            return Err(err(format!("expected 5 cells, got {}", cells.len())));
        }
        let float = |s: &str| s.trim().parse::<f64>().map_err(|_| err(format!("bad number {s:?}")));
        entries.push(EpochEntry {
            epoch: cells[0]
                .trim()
                .parse()
                .map_err(|_| err(format!("bad epoch {:?}", cells[0])))?,
            effective_passes: float(cells[1])?,
            wall_seconds: float(cells[2])?,
            objective: float(cells[3])?,
            gap: if cells[4].trim().is_empty() {
                None
            } else {
                Some(float(cells[4])?)
            },
        });
    }
    Ok(entries)
}
