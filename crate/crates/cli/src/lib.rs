//! Command-line front end: `run`, `verify`, `gen-synth` and `rate`.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use vrsgd::diagnostics::run_verification;
use vrsgd::experiment::{SyntheticKind, SyntheticSpec};
use vrsgd::{run_experiment, theoretical_rate_sc, to_libsvm, ExperimentConfig, RateOption};

#[derive(Debug, Parser)]
#[command(name = "vrsgd", about = "Variance-reduced solvers and experiment runner")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every solver entry of an experiment config.
    Run { config: PathBuf },
    /// Check the implementations against independent oracles.
    Verify,
    /// Write a synthetic instance in LIBSVM format.
    GenSynth {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Nonzero fraction per row, sparse kind only.
        #[arg(long, default_value_t = 0.01)]
        density: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Contraction factor of the strongly convex convergence bound.
    Rate {
        #[arg(long = "L")]
        l: f64,
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        c: f64,
        #[arg(long, value_enum, default_value = "II")]
        option: OptionArg,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Kind {
    Ridge,
    Classification,
    Sparse,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OptionArg {
    #[value(name = "I")]
    I,
    #[value(name = "II")]
    II,
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code: 0 on success, 1 on failure, 2 on a usage error.
pub fn cli_main<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            1
        }
    }
}

/// `Ok(false)` means the command ran but reported failure.
fn execute(cmd: Command, out: &mut dyn Write) -> Result<bool> {
    match cmd {
        Command::Run { config } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let report = run_experiment(&cfg)?;
            if let Some(f) = report.f_star {
                writeln!(out, "f_star = {f:.16e}")?;
            }
            for run in &report.runs {
                let rec = &run.record;
                let status = if rec.diverged() { "DIVERGED" } else { "ok" };
                writeln!(
                    out,
                    "{:<20} seed {:<4} {:<8} F = {:.10e}  -> {}",
                    run.label,
                    run.seed,
                    status,
                    rec.final_objective,
                    run.trace_path.display()
                )?;
            }
            writeln!(out, "summary: {}", report.summary_path.display())?;
            Ok(true)
        }
        Command::Verify => {
            let mut all = true;
            for c in run_verification() {
                writeln!(
                    out,
                    "{} {}: {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                )?;
                all &= c.passed;
            }
            Ok(all)
        }
        Command::GenSynth {
            n,
            d,
            kind,
            seed,
            density,
            out: path,
        } => {
            let spec = SyntheticSpec {
                kind: match kind {
                    Kind::Ridge => SyntheticKind::Ridge,
                    Kind::Classification => SyntheticKind::Classification,
                    Kind::Sparse => SyntheticKind::Sparse,
                },
                n,
                d,
                seed,
                density,
            };
            let ds = spec.generate()?;
            fs::write(&path, to_libsvm(&ds)).with_context(|| format!("writing {}", path.display()))?;
            writeln!(out, "wrote {n} samples x {d} features to {}", path.display())?;
            Ok(true)
        }
        Command::Rate {
            l,
            mu,
            eta,
            m,
            c,
            option,
        } => {
            let option = match option {
                OptionArg::I => RateOption::I,
                OptionArg::II => RateOption::II,
            };
            let r = theoretical_rate_sc(l, mu, eta, m, c, option)?;
            if !r.rho.is_finite() {
                bail!("rate is not finite for these constants");
            }
            writeln!(out, "rho = {:.6}", r.rho)?;
            writeln!(out, "{}", if r.convergent() { "convergent" } else { "not convergent" })?;
            Ok(true)
        }
    }
}
