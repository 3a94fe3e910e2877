//! Every theory suite, run in parallel, reported in a fixed order.

use rayon::prelude::*;
use serde::Serialize;
use shampoo_core::theory::{default_suites, PropertyReport};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub trials: u64,
    pub passed: bool,
    pub total_violations: u64,
    pub reports: Vec<PropertyReport>,
}

pub fn run_verify(trials: u64, seed: u64) -> VerifyReport {
    let suites = default_suites(trials, seed);
    let reports: Vec<PropertyReport> = suites.par_iter().map(|s| (s.run)()).collect();
    let total_violations = reports.iter().map(|r| r.violations).sum();
    VerifyReport {
        seed,
        trials,
        passed: total_violations == 0,
        total_violations,
        reports,
    }
}
