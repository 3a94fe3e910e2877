//! Randomized checks of the matrix inequalities and optimizer bounds.
//!
//! Each suite draws its trials from independent substreams of one seed and
//! returns a [`PropertyReport`]. A trial is a violation when any of its
//! margins (right side minus left side) falls below `-tolerance · scale`,
//! where `scale` is the magnitude of the right side, or 1 when that is zero.
//! Monte Carlo suites use `scale` = standard error and `tolerance` = 5.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::optimizer::TraceRecord;

mod dynamics;
mod gaussian;
pub mod gen;
mod inequalities;

pub use dynamics::{
    confinement_case, verify_update_bound, verify_weight_confinement, ConfinementCase, ConfinementOutcome,
};
pub use gaussian::verify_gaussian_covariance;
pub use inequalities::{
    verify_agmg, verify_matrix_cauchy_schwarz, verify_norm_chain, verify_operator_monotone, verify_psd_trace_identity,
    verify_schatten_holder, verify_trace_root_subadd,
};

/// Relative slack for exact inequalities.
pub const EXACT_TOL: f64 = 1e-9;
/// Relative slack for the norm chain and the PSD trace identity.
pub const NORM_TOL: f64 = 1e-10;
/// Standard errors allowed for Monte Carlo claims.
pub const MC_TOL: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub name: String,
    pub trials: u64,
    pub violations: u64,
    /// Trials whose hypotheses did not hold; excluded from `violations`.
    pub not_applicable: u64,
    /// Trials that failed with a numerical error; counted as violations.
    pub errors: u64,
    /// Smallest `margin / scale` seen. `None` if nothing was evaluated.
    pub worst_slack: Option<f64>,
    pub tolerance: f64,
    pub seed: u64,
    pub config: BTreeMap<String, f64>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Accumulates trial outcomes into a report.
pub(crate) struct Tally {
    report: PropertyReport,
}

impl Tally {
    pub(crate) fn new(name: &str, tolerance: f64, seed: u64) -> Self {
        Self {
            report: PropertyReport {
                name: name.to_string(),
                trials: 0,
                violations: 0,
                not_applicable: 0,
                errors: 0,
                worst_slack: None,
                tolerance,
                seed,
                config: BTreeMap::new(),
            },
        }
    }

    pub(crate) fn config(&mut self, key: &str, value: f64) -> &mut Self {
        self.report.config.insert(key.to_string(), value);
        self
    }

    /// One trial with one or more `(margin, scale)` pairs.
    pub(crate) fn record(&mut self, margins: &[(f64, f64)]) {
        self.report.trials += 1;
        let mut violated = false;
        for &(margin, scale) in margins {
            let scale = if scale == 0.0 { 1.0 } else { scale.abs() };
            let slack = if margin.is_nan() || scale.is_nan() {
                f64::NEG_INFINITY
            } else {
                margin / scale
            };
            if !(slack >= -self.report.tolerance) {
                violated = true;
            }
            self.report.worst_slack = Some(match self.report.worst_slack {
                Some(w) => w.min(slack),
                None => slack,
            });
        }
        if violated {
            self.report.violations += 1;
        }
    }

    /// Records the outcome of a fallible trial; errors count as violations.
    pub(crate) fn record_result(&mut self, margins: Result<Vec<(f64, f64)>>) {
        match margins {
            Ok(m) => self.record(&m),
            Err(_) => {
                self.report.trials += 1;
                self.report.errors += 1;
                self.report.violations += 1;
            }
        }
    }

    pub(crate) fn not_applicable(&mut self) {
        self.report.trials += 1;
        self.report.not_applicable += 1;
    }

    pub(crate) fn finish(self) -> PropertyReport {
        self.report
    }
}

/// Substream id for trial `trial` of suite `suite`.
pub(crate) fn stream_id(suite: u64, trial: u64) -> u64 {
    (suite << 32) | trial
}

/// Least-squares slope and `R²` of `log(run_avg_grad_nuclear)` against
/// `log(k)` over the latter half of the records.
pub fn fit_rate_slope(trace: &[TraceRecord]) -> Result<(f64, f64)> {
    let pts: Vec<(f64, f64)> = trace
        .iter()
        .filter_map(|r| r.run_avg_grad_nuclear.map(|y| (r.k as f64, y)))
        .collect();
    if pts.len() < 10 {
        return Err(Error::UndefinedSlope(format!(
            "need at least 10 records, got {}",
            pts.len()
        )));
    }
    let tail = &pts[pts.len() / 2..];
    if tail.iter().any(|&(_, y)| !(y > 0.0)) {
        return Err(Error::UndefinedSlope("non-positive gradient norm in trace".into()));
    }
    let xs: Vec<f64> = tail.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = tail.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::UndefinedSlope("all records share one step index".into()));
    }
    if ys.iter().all(|y| *y == ys[0]) {
        return Err(Error::UndefinedSlope("constant trace".into()));
    }
    let slope = sxy / sxx;
    let r_squared = sxy * sxy / (sxx * syy);
    Ok((slope, r_squared))
}

/// A named suite ready to run.
pub struct Suite {
    pub name: &'static str,
    pub run: Box<dyn Fn() -> PropertyReport + Send + Sync>,
}

/// Default means and deviations for the Gaussian covariance check.
pub const GAUSSIAN_CASES: [(f64, f64); 3] = [(0.0, 1.0), (1.0, 1.0), (2.0, 0.5)];
/// Default square sizes for the Gaussian covariance check.
pub const GAUSSIAN_DIMS: [usize; 3] = [2, 4, 8];
/// Default Monte Carlo sample count.
pub const GAUSSIAN_SAMPLES: u64 = 100_000;

/// Every suite at its default configuration. `trials` sets the trial count
/// of the matrix inequality suites; the optimizer suites use fixed counts
/// (100 trajectories of 200 steps, 50 confinement runs) and the Gaussian
/// suites use [`GAUSSIAN_SAMPLES`].
pub fn default_suites(trials: u64, seed: u64) -> Vec<Suite> {
    const MAX_DIM: usize = 8;
    let mut suites = vec![
        Suite {
            name: "schatten_holder",
            run: Box::new(move || verify_schatten_holder(trials, MAX_DIM, seed)),
        },
        Suite {
            name: "matrix_cauchy_schwarz",
            run: Box::new(move || verify_matrix_cauchy_schwarz(trials, MAX_DIM, seed)),
        },
        Suite {
            name: "trace_root_subadditivity",
            run: Box::new(move || verify_trace_root_subadd(trials, MAX_DIM, seed)),
        },
        Suite {
            name: "operator_monotone",
            run: Box::new(move || verify_operator_monotone(trials, MAX_DIM, seed)),
        },
        Suite {
            name: "weighted_am_gm",
            run: Box::new(move || verify_agmg(trials.max(1000), seed)),
        },
        Suite {
            name: "norm_chain",
            run: Box::new(move || verify_norm_chain(trials, seed)),
        },
        Suite {
            name: "psd_trace_identity",
            run: Box::new(move || verify_psd_trace_identity(trials, seed)),
        },
        Suite {
            name: "update_bound",
            run: Box::new(move || verify_update_bound(100, MAX_DIM, 200, seed)),
        },
        Suite {
            name: "weight_confinement",
            run: Box::new(move || verify_weight_confinement(50, seed)),
        },
    ];
    for d in GAUSSIAN_DIMS {
        for (mu, xi) in GAUSSIAN_CASES {
            suites.push(Suite {
                name: "gaussian_covariance",
                run: Box::new(move || verify_gaussian_covariance(d, d, mu, xi, GAUSSIAN_SAMPLES, seed)),
            });
        }
    }
    suites
}
