use serde::Serialize;

use super::{Hyperparams, OptimizerState, StepDiagnostics};
use crate::error::{Error, Result};
use crate::matfun::{fro_norm, nuclear_norm, Mat};
use crate::oracles::GradOracle;
use crate::rng;

/// One row of a run trace.
///
/// Gradient, objective and distance columns refer to the iterate `X_k` at
/// which the `k`-th gradient was sampled; the diagnostics come from step `k`
/// itself, so `x_op_norm` is `‖X_{k+1}‖_op`. Columns the oracle cannot
/// provide are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRecord {
    pub k: u64,
    pub f_value: Option<f64>,
    pub grad_fro: Option<f64>,
    pub grad_nuclear: Option<f64>,
    pub run_avg_grad_fro: Option<f64>,
    pub run_avg_grad_nuclear: Option<f64>,
    pub dist_to_opt: Option<f64>,
    pub update_op_norm: f64,
    pub x_op_norm: f64,
    pub trace_l_sqrt: f64,
    pub trace_r_sqrt: f64,
}

pub trait TraceSink {
    fn record(&mut self, rec: &TraceRecord);
}

impl TraceSink for Vec<TraceRecord> {
    fn record(&mut self, rec: &TraceRecord) {
        self.push(*rec);
    }
}

/// Discards every record.
pub struct NullSink;

impl TraceSink for NullSink {
    fn record(&mut self, _rec: &TraceRecord) {}
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub steps: u64,
    pub seed: u64,
    pub record_interval: u64,
}

impl RunOptions {
    /// Records roughly 10⁴ rows regardless of `steps`.
    pub fn new(steps: u64, seed: u64) -> Self {
        Self {
            steps,
            seed,
            record_interval: default_record_interval(steps),
        }
    }
}

/// `max(1, steps / 10⁴)`.
pub fn default_record_interval(steps: u64) -> u64 {
    (steps / 10_000).max(1)
}

/// Step 1, every `interval`-th step, and the final step are recorded.
pub fn is_recorded(k: u64, interval: u64, steps: u64) -> bool {
    k == 1 || k.is_multiple_of(interval) || k == steps
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub final_state: OptimizerState,
    pub steps_completed: u64,
    /// `false` when the run stopped early on an error.
    pub complete: bool,
    pub error: Option<Error>,
    pub last_record: Option<TraceRecord>,
    pub min_recorded_grad_fro: Option<f64>,
    pub mean_recorded_grad_fro: Option<f64>,
    /// Largest update norm over all steps.
    pub max_update_op_norm: f64,
    /// Largest `λ‖X_{k+1}‖_op` over all steps.
    pub max_lambda_x_op_norm: f64,
    /// Largest `‖X_{k+1}‖_op` over all steps.
    pub max_x_op_norm: f64,
}

/// Drives the optimizer for `opts.steps` steps against `oracle`, drawing
/// gradients from stream 0 of `opts.seed`.
///
/// Invalid inputs are rejected up front. Errors raised mid-run (oracle or
/// numerical failures) end the run and are reported in the summary with
/// `complete = false`.
pub fn run(
    oracle: &dyn GradOracle,
    x1: Mat,
    hyper: &Hyperparams,
    opts: &RunOptions,
    sink: &mut dyn TraceSink,
) -> Result<RunSummary> {
    if opts.steps == 0 {
        return Err(Error::InvalidParameter("steps must be >= 1".into()));
    }
    if opts.record_interval == 0 {
        return Err(Error::InvalidParameter("record_interval must be >= 1".into()));
    }
    if x1.shape() != oracle.shape() {
        return Err(Error::Shape {
            op: "run",
            expected: oracle.shape(),
            got: x1.shape(),
        });
    }
    let mut state = OptimizerState::init(x1, hyper)?;
    let mut rng = rng::stream(opts.seed, 0);

    let mut sum_fro = 0.0;
    let mut sum_nuc = 0.0;
    let mut has_grad = true;
    let mut recorded_fro = Vec::new();
    let mut summary = RunSummary {
        final_state: state.clone(),
        steps_completed: 0,
        complete: true,
        error: None,
        last_record: None,
        min_recorded_grad_fro: None,
        mean_recorded_grad_fro: None,
        max_update_op_norm: 0.0,
        max_lambda_x_op_norm: 0.0,
        max_x_op_norm: 0.0,
    };

    for k in 1..=opts.steps {
        let outcome = (|| -> Result<(OptimizerState, TraceRecord)> {
            let record = is_recorded(k, opts.record_interval, opts.steps);
            let (grad_fro, grad_nuclear) = match has_grad.then(|| oracle.exact_grad(&state.x)) {
                Some(Ok(g)) => (Some(fro_norm(&g)), Some(nuclear_norm(&g)?)),
                Some(Err(Error::MissingCapability(_))) => {
                    has_grad = false;
                    (None, None)
                }
                Some(Err(e)) => return Err(e),
                None => (None, None),
            };
            if let (Some(f), Some(n)) = (grad_fro, grad_nuclear) {
                sum_fro += f;
                sum_nuc += n;
            }
            let f_value = match record {
                true => match oracle.value(&state.x) {
                    Ok(v) => Some(v),
                    Err(Error::MissingCapability(_)) => None,
                    Err(e) => return Err(e),
                },
                false => None,
            };
            let dist_to_opt = match record {
                true => oracle
                    .optimum()
                    .map(|opt| state.x.sub(opt).map(|d| fro_norm(&d)))
                    .transpose()?,
                false => None,
            };

            let g = oracle.sample_grad(&state.x, &mut rng)?;
            let (next, diag): (OptimizerState, StepDiagnostics) = state.step(&g, hyper)?;
            let kf = k as f64;
            let rec = TraceRecord {
                k,
                f_value,
                grad_fro,
                grad_nuclear,
                run_avg_grad_fro: grad_fro.map(|_| sum_fro / kf),
                run_avg_grad_nuclear: grad_nuclear.map(|_| sum_nuc / kf),
                dist_to_opt,
                update_op_norm: diag.update_op_norm,
                x_op_norm: diag.x_op_norm,
                trace_l_sqrt: diag.trace_l_sqrt,
                trace_r_sqrt: diag.trace_r_sqrt,
            };
            Ok((next, rec))
        })();

        match outcome {
            Ok((next, rec)) => {
                state = next;
                summary.steps_completed = k;
                summary.max_update_op_norm = summary.max_update_op_norm.max(rec.update_op_norm);
                summary.max_x_op_norm = summary.max_x_op_norm.max(rec.x_op_norm);
                summary.max_lambda_x_op_norm = summary.max_lambda_x_op_norm.max(hyper.lambda * rec.x_op_norm);
                if is_recorded(k, opts.record_interval, opts.steps) {
                    if let Some(f) = rec.grad_fro {
                        recorded_fro.push(f);
                    }
                    sink.record(&rec);
                    summary.last_record = Some(rec);
                }
            }
            Err(e) => {
                summary.complete = false;
                summary.error = Some(e);
                break;
            }
        }
    }

    if !recorded_fro.is_empty() {
        summary.min_recorded_grad_fro = Some(recorded_fro.iter().copied().fold(f64::INFINITY, f64::min));
        summary.mean_recorded_grad_fro = Some(recorded_fro.iter().sum::<f64>() / recorded_fro.len() as f64);
    }
    summary.final_state = state;
    Ok(summary)
}
