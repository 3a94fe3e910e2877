//! Weight-decay threshold experiment on the 2×2 toy problem.
//!
//! Five runs share one gradient stream and differ only in `λ`. Large
//! weight decay pulls the iterates toward the origin and away from
//! `X* = 4·𝟙𝟙ᵀ`; small weight decay converges.

use std::path::Path;

use serde::Serialize;
use shampoo_core::matfun::spectral_norm;
use shampoo_core::oracles::ToyProblem;
use shampoo_core::{ExponentPair, TraceRecord};

use crate::config::{ExperimentConfig, HyperSpec, Problem, ToySpec};
use crate::error::{HarnessError, Result};
use crate::experiment::{sweep_with_traces, write_json, RunReport};

pub const DEFAULT_STEPS: u64 = 1_000_000;
pub const FULL_STEPS: u64 = 1_000_000_000;
pub const LAMBDAS: [f64; 5] = [1e-1, 1e-2, 1e-3, 1e-4, 0.0];
pub const EPS: f64 = 1e-12;
/// λ at or above this is expected to stall away from `X*`.
pub const LARGE_LAMBDA: f64 = 1e-3;
/// λ at or below this is expected to converge.
pub const SMALL_LAMBDA: f64 = 1e-4;
pub const SEPARATION: f64 = 10.0;
/// Step at which the λ = 0 running average is compared with its final value.
pub const DECAY_FROM: u64 = 1_000;
pub const DECAY: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct ReproOptions {
    pub steps: u64,
    pub seed: u64,
    pub lambdas: Vec<f64>,
    pub pq: ExponentPair,
}

impl Default for ReproOptions {
    fn default() -> Self {
        Self {
            steps: DEFAULT_STEPS,
            seed: 0,
            lambdas: LAMBDAS.to_vec(),
            pq: ExponentPair::shampoo(),
        }
    }
}

/// `min final distance over large λ ≥ 10 · max final distance over small λ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Separation {
    pub min_large: f64,
    pub max_small: f64,
    pub ratio: f64,
    pub pass: bool,
}

/// For λ = 0, final running-average gradient norm against its value at
/// step [`DECAY_FROM`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decay {
    pub k_from: u64,
    pub from: f64,
    pub k_to: u64,
    pub to: f64,
    pub ratio: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReproReport {
    pub steps: u64,
    pub seed: u64,
    pub x_star_op_norm: f64,
    pub x1_op_norm: f64,
    pub runs: Vec<RunReport>,
    pub separation: Option<Separation>,
    pub decay: Option<Decay>,
}

impl ReproReport {
    pub fn passed(&self) -> bool {
        self.separation.as_ref().is_none_or(|s| s.pass)
            && self.decay.as_ref().is_none_or(|d| d.pass)
            && self.runs.iter().all(|r| r.complete)
    }
}

pub fn separation(runs: &[RunReport]) -> Option<Separation> {
    let dist = |pred: &dyn Fn(f64) -> bool| -> Vec<f64> {
        runs.iter()
            .filter(|r| pred(r.lambda))
            .filter_map(|r| r.final_dist_to_opt)
            .collect()
    };
    let large = dist(&|l| l >= LARGE_LAMBDA);
    let small = dist(&|l| l <= SMALL_LAMBDA);
    if large.is_empty() || small.is_empty() {
        return None;
    }
    let min_large = large.iter().copied().fold(f64::INFINITY, f64::min);
    let max_small = small.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ratio = min_large / max_small;
    Some(Separation {
        min_large,
        max_small,
        ratio,
        pass: ratio >= SEPARATION,
    })
}

/// Uses the last record at or before [`DECAY_FROM`].
pub fn decay(trace: &[TraceRecord]) -> Option<Decay> {
    let from = trace.iter().rev().find(|r| r.k <= DECAY_FROM)?;
    let to = trace.last()?;
    if to.k <= from.k {
        return None;
    }
    let (a, b) = (from.run_avg_grad_fro?, to.run_avg_grad_fro?);
    let ratio = b / a;
    Some(Decay {
        k_from: from.k,
        from: a,
        k_to: to.k,
        to: b,
        ratio,
        pass: ratio <= DECAY,
    })
}

/// Runs the sweep into `out_dir` and writes `report.json` next to the
/// traces and plots.
pub fn repro_fig5(opts: &ReproOptions, out_dir: &Path) -> Result<ReproReport> {
    let toy = ToyProblem::new();
    let cfg = ExperimentConfig {
        problem: Problem::ToyPaper,
        steps: opts.steps,
        record_interval: None,
        seed: opts.seed,
        hyper: HyperSpec::Toy(ToySpec {
            lambda: 0.0,
            eps: EPS,
            pq: opts.pq,
        }),
        sweep: Some(opts.lambdas.clone()),
        out_dir: out_dir.to_path_buf(),
    };
    let (summary, traces) = sweep_with_traces(&cfg, out_dir, "repro-fig5")?;
    if let Some(f) = summary.failures.first() {
        return Err(HarnessError::Failed(format!("lambda = {}: {}", f.lambda, f.error)));
    }
    let report = ReproReport {
        steps: opts.steps,
        seed: opts.seed,
        x_star_op_norm: spectral_norm(&toy.x_star)?,
        x1_op_norm: spectral_norm(&toy.initial_point())?,
        separation: separation(&summary.runs),
        decay: traces.iter().find(|(l, _)| *l == 0.0).and_then(|(_, t)| decay(t)),
        runs: summary.runs,
    };
    write_json(&report, &out_dir.join("report.json"))?;
    Ok(report)
}

/// Human-readable summary, one line per λ followed by the criteria.
pub fn render(report: &ReproReport) -> String {
    let mut out = format!(
        "toy weight-decay sweep: K = {}, seed = {}, ‖X*‖_op = {:.4}, ‖X₁‖_op = {:.4}\n",
        report.steps, report.seed, report.x_star_op_norm, report.x1_op_norm
    );
    out.push_str("lambda      final ‖X_K − X*‖_F   final avg ‖∇f‖_F   max λ‖X‖_op\n");
    for r in &report.runs {
        out.push_str(&format!(
            "{:<10e}  {:>18.6e}  {:>17.6e}  {:>12.4e}\n",
            r.lambda,
            r.final_dist_to_opt.unwrap_or(f64::NAN),
            r.final_run_avg_grad_fro.unwrap_or(f64::NAN),
            r.max_lambda_x_op_norm
        ));
    }
    match &report.separation {
        Some(s) => out.push_str(&format!(
            "separation: min large-λ distance / max small-λ distance = {:.3} (need ≥ {SEPARATION}) {}\n",
            s.ratio,
            verdict(s.pass)
        )),
        None => out.push_str("separation: not evaluated (needs λ ≥ 1e-3 and λ ≤ 1e-4)\n"),
    }
    match &report.decay {
        Some(d) => out.push_str(&format!(
            "decay: λ = 0 running average at k = {} over k = {} is {:.4} (need ≤ {DECAY}) {}\n",
            d.k_to,
            d.k_from,
            d.ratio,
            verdict(d.pass)
        )),
        None => out.push_str("decay: not evaluated (needs λ = 0 and K > 1000)\n"),
    }
    out
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}
