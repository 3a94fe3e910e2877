//! Single runs and weight-decay sweeps.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::Serialize;
use shampoo_core::optimizer::{run, RunOptions};
use shampoo_core::schedule::ScheduleOutput;
use shampoo_core::theory::fit_rate_slope;
use shampoo_core::{Hyperparams, TraceRecord};

use crate::config::{ExperimentConfig, Instance};
use crate::error::{HarnessError, Result};
use crate::plot::{emit_plot_svg, series_from_trace, PlotStyle, Series};
use crate::trace_io::write_trace_csv;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub lambda: f64,
    pub trace_file: String,
    pub steps_completed: u64,
    pub complete: bool,
    pub error: Option<String>,
    pub hyper: Hyperparams,
    pub schedule: Option<ScheduleOutput>,
    pub final_dist_to_opt: Option<f64>,
    pub final_run_avg_grad_fro: Option<f64>,
    pub final_run_avg_grad_nuclear: Option<f64>,
    pub max_update_op_norm: f64,
    pub max_x_op_norm: f64,
    pub max_lambda_x_op_norm: f64,
    /// Log-log slope of the running-average nuclear gradient norm over the
    /// second half of the trace.
    pub rate_slope: Option<f64>,
    pub rate_r_squared: Option<f64>,
}

/// A weight decay with its recorded trace.
pub type LambdaTrace = (f64, Vec<TraceRecord>);

/// One λ that could not be run at all.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepFailure {
    pub lambda: f64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub seed: u64,
    pub steps: u64,
    pub runs: Vec<RunReport>,
    pub failures: Vec<SweepFailure>,
}

impl SweepSummary {
    pub fn all_complete(&self) -> bool {
        self.failures.is_empty() && self.runs.iter().all(|r| r.complete)
    }
}

/// File-name fragment for a weight decay, e.g. `1e-3`.
pub fn lambda_tag(lambda: f64) -> String {
    format!("{lambda:e}")
}

/// Runs `hyper` from the instance's starting point and returns the report
/// with the recorded trace.
pub fn execute(
    inst: &Instance,
    hyper: Hyperparams,
    schedule: Option<ScheduleOutput>,
    opts: &RunOptions,
    trace_file: &str,
) -> Result<(RunReport, Vec<TraceRecord>)> {
    let mut trace: Vec<TraceRecord> = Vec::new();
    let s = run(inst.oracle.as_ref(), inst.x1.clone(), &hyper, opts, &mut trace)?;
    let last = trace.last();
    let slope = fit_rate_slope(&trace).ok();
    let report = RunReport {
        lambda: hyper.lambda,
        trace_file: trace_file.into(),
        steps_completed: s.steps_completed,
        complete: s.complete,
        error: s.error.map(|e| e.to_string()),
        hyper,
        schedule,
        final_dist_to_opt: last.and_then(|r| r.dist_to_opt),
        final_run_avg_grad_fro: last.and_then(|r| r.run_avg_grad_fro),
        final_run_avg_grad_nuclear: last.and_then(|r| r.run_avg_grad_nuclear),
        max_update_op_norm: s.max_update_op_norm,
        max_x_op_norm: s.max_x_op_norm,
        max_lambda_x_op_norm: s.max_lambda_x_op_norm,
        rate_slope: slope.map(|s| s.0),
        rate_r_squared: slope.map(|s| s.1),
    };
    Ok((report, trace))
}

pub fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| HarnessError::Failed(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

/// `metadata.json`: the only output that depends on the wall clock.
pub fn write_metadata(dir: &Path, command: &str, seed: u64) -> Result<()> {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let meta = serde_json::json!({
        "command": command,
        "seed": seed,
        "unix_time": secs,
        "version": env!("CARGO_PKG_VERSION"),
    });
    write_json(&meta, &dir.join("metadata.json"))
}

/// The two panels: running-average gradient norm and distance to the
/// optimum against the step. The distance panel is skipped when no trace
/// has a known optimum.
pub fn write_plots(traces: &[(String, &[TraceRecord])], dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let grad: Vec<Series> = traces
        .iter()
        .map(|(label, t)| series_from_trace(label, t, |r| r.run_avg_grad_fro))
        .collect();
    if grad.iter().any(|s| !s.points.is_empty()) {
        let path = dir.join("grad_norm.svg");
        let style = PlotStyle::log_log("Running average of the gradient norm", "step k", "(1/k) Σ ‖∇f(X_t)‖_F");
        emit_plot_svg(&grad, &style, &path)?;
        written.push(path);
    }
    let dist: Vec<Series> = traces
        .iter()
        .map(|(label, t)| series_from_trace(label, t, |r| r.dist_to_opt))
        .collect();
    if dist.iter().any(|s| !s.points.is_empty()) {
        let path = dir.join("distance.svg");
        let style = PlotStyle::log_log("Distance to the optimum", "step k", "‖X_k − X*‖_F");
        emit_plot_svg(&dist, &style, &path)?;
        written.push(path);
    }
    Ok(written)
}

fn options(cfg: &ExperimentConfig) -> RunOptions {
    RunOptions {
        steps: cfg.steps,
        seed: cfg.seed,
        record_interval: cfg.record_interval(),
    }
}

/// Writes `trace.csv`, `summary.json`, the plots and `metadata.json` into
/// `out_dir`.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunReport> {
    cfg.validate()?;
    let inst = cfg.instance()?;
    let (hyper, schedule) = cfg.hyperparams(&inst, None)?;
    create_dir(out_dir)?;
    let (report, trace) = execute(&inst, hyper, schedule, &options(cfg), "trace.csv")?;
    write_trace_csv(&trace, &out_dir.join("trace.csv"))?;
    write_json(&report, &out_dir.join("summary.json"))?;
    write_plots(&[(format!("λ = {}", report.lambda), &trace)], out_dir)?;
    write_metadata(out_dir, "run", cfg.seed)?;
    Ok(report)
}

/// Runs every λ of the sweep in parallel with the same seed, writing one
/// trace per λ, `summary.json`, the plots, and `failures.json` when some λ
/// could not be run.
pub fn run_sweep(cfg: &ExperimentConfig, out_dir: &Path) -> Result<SweepSummary> {
    sweep_with_traces(cfg, out_dir, "sweep").map(|(summary, _)| summary)
}

/// [`run_sweep`], also returning the trace of each completed λ in sweep
/// order.
pub fn sweep_with_traces(
    cfg: &ExperimentConfig,
    out_dir: &Path,
    command: &str,
) -> Result<(SweepSummary, Vec<LambdaTrace>)> {
    cfg.validate()?;
    let lambdas = cfg
        .sweep
        .clone()
        .ok_or_else(|| HarnessError::Config("sweep needs a non-empty list of lambda values".into()))?;
    let inst = cfg.instance()?;
    create_dir(out_dir)?;
    let opts = options(cfg);
    let outcomes: Vec<Result<(RunReport, Vec<TraceRecord>)>> = lambdas
        .par_iter()
        .map(|&lambda| {
            let file = format!("trace_lambda_{}.csv", lambda_tag(lambda));
            let (hyper, schedule) = cfg.hyperparams(&inst, Some(lambda))?;
            let (report, trace) = execute(&inst, hyper, schedule, &opts, &file)?;
            write_trace_csv(&trace, &out_dir.join(&file))?;
            Ok((report, trace))
        })
        .collect();

    let mut runs = Vec::new();
    let mut traces = Vec::new();
    let mut failures = Vec::new();
    for (lambda, outcome) in lambdas.iter().zip(outcomes) {
        match outcome {
            Ok((report, trace)) => {
                runs.push(report);
                traces.push((*lambda, trace));
            }
            Err(HarnessError::Io { path, source }) => return Err(HarnessError::Io { path, source }),
            Err(e) => failures.push(SweepFailure {
                lambda: *lambda,
                error: e.to_string(),
            }),
        }
    }
    let summary = SweepSummary {
        seed: cfg.seed,
        steps: cfg.steps,
        runs,
        failures,
    };
    write_json(&summary, &out_dir.join("summary.json"))?;
    if !summary.failures.is_empty() {
        write_json(&summary.failures, &out_dir.join("failures.json"))?;
    }
    let views: Vec<(String, &[TraceRecord])> = traces.iter().map(|(l, t)| (format!("λ = {l}"), t.as_slice())).collect();
    write_plots(&views, out_dir)?;
    write_metadata(out_dir, command, cfg.seed)?;
    Ok((summary, traces))
}
