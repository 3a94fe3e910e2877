//! Experiment configuration files.
//!
//! ```json
//! {
//!   "problem": "toy_paper",
//!   "steps": 100000,
//!   "seed": 0,
//!   "hyper": { "toy": { "lambda": 0.001 } },
//!   "sweep": [0.1, 0.01, 0.001, 0.0001, 0.0],
//!   "out_dir": "out/toy"
//! }
//! ```
//!
//! `problem` is `"toy_paper"`, `{"quadratic": {...}}` or
//! `{"matrix_factorization": {...}}`. `hyper` is one of
//! `{"explicit": Hyperparams}`, `{"schedule": ScheduleSpec}` or
//! `{"toy": ToySpec}`. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use shampoo_core::matfun::Mat;
use shampoo_core::oracles::{MatrixFactorization, QuadraticOracle, ToyProblem};
use shampoo_core::schedule::{self, ScheduleInput, ScheduleOutput};
use shampoo_core::{ExponentPair, GradOracle, Hyperparams};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Problem {
    ToyPaper,
    Quadratic {
        m: usize,
        n: usize,
        #[serde(default = "default_condition")]
        condition: f64,
        #[serde(default)]
        noise: f64,
        /// Seed for the problem instance, separate from the run seed.
        #[serde(default)]
        instance_seed: u64,
    },
    MatrixFactorization {
        m: usize,
        n: usize,
        #[serde(default)]
        noise: f64,
        #[serde(default)]
        instance_seed: u64,
    },
}

fn default_condition() -> f64 {
    10.0
}

/// Schedule constants; missing ones are taken from the problem.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    #[serde(default)]
    pub smoothness: Option<f64>,
    /// `f(X₁) − f*`
    #[serde(default)]
    pub gap: Option<f64>,
    #[serde(default)]
    pub sigma_sq: Option<f64>,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default)]
    pub eps_hat: Option<f64>,
    #[serde(default)]
    pub pq: ExponentPair,
    #[serde(default)]
    pub lambda: Option<f64>,
}

/// `θ = 1 − 1/√K`, `β = √θ`, `η = 1/√K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToySpec {
    #[serde(default)]
    pub lambda: f64,
    #[serde(default = "default_toy_eps")]
    pub eps: f64,
    #[serde(default)]
    pub pq: ExponentPair,
}

fn default_toy_eps() -> f64 {
    1e-12
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum HyperSpec {
    Explicit(Hyperparams),
    Schedule(ScheduleSpec),
    Toy(ToySpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: Problem,
    pub steps: u64,
    /// Defaults to `max(1, steps / 10⁴)`.
    #[serde(default)]
    pub record_interval: Option<u64>,
    #[serde(default)]
    pub seed: u64,
    pub hyper: HyperSpec,
    /// Weight decay values for `sweep`; each replaces the configured `λ`.
    #[serde(default)]
    pub sweep: Option<Vec<f64>>,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

/// An oracle with its starting point.
pub struct Instance {
    pub oracle: Box<dyn GradOracle>,
    pub x1: Mat,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let cfg: Self =
            serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.steps == 0 {
            return bad("steps must be >= 1".into());
        }
        if self.record_interval == Some(0) {
            return bad("record_interval must be >= 1".into());
        }
        if let Some(sweep) = &self.sweep {
            if sweep.is_empty() {
                return bad("sweep must not be empty".into());
            }
            if let Some(v) = sweep.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                return bad(format!("sweep entries must be finite and >= 0, got {v}"));
            }
        }
        if let HyperSpec::Explicit(h) = &self.hyper {
            h.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        }
        Ok(())
    }

    pub fn record_interval(&self) -> u64 {
        self.record_interval
            .unwrap_or_else(|| shampoo_core::optimizer::default_record_interval(self.steps))
    }

    pub fn instance(&self) -> Result<Instance> {
        Ok(match &self.problem {
            Problem::ToyPaper => {
                let toy = ToyProblem::new();
                let x1 = toy.initial_point();
                Instance {
                    oracle: Box::new(toy),
                    x1,
                }
            }
            Problem::Quadratic {
                m,
                n,
                condition,
                noise,
                instance_seed,
            } => {
                let q = QuadraticOracle::new(*m, *n, *condition, *noise, *instance_seed)
                    .map_err(|e| HarnessError::Config(e.to_string()))?;
                Instance {
                    oracle: Box::new(q),
                    x1: Mat::zeros(*m, *n),
                }
            }
            Problem::MatrixFactorization {
                m,
                n,
                noise,
                instance_seed,
            } => {
                let f = MatrixFactorization::new(*m, *n, *noise, *instance_seed)
                    .map_err(|e| HarnessError::Config(e.to_string()))?;
                let x1 = f.initial_point();
                Instance {
                    oracle: Box::new(f),
                    x1,
                }
            }
        })
    }

    /// Hyperparameters for weight decay `lambda` (the configured one when
    /// `None`), and the schedule output when the schedule was used.
    pub fn hyperparams(&self, inst: &Instance, lambda: Option<f64>) -> Result<(Hyperparams, Option<ScheduleOutput>)> {
        match &self.hyper {
            HyperSpec::Explicit(h) => Ok((lambda.map_or(*h, |l| h.with_lambda(l)), None)),
            HyperSpec::Toy(t) => {
                let h = schedule::toy_passthrough(self.steps, lambda.unwrap_or(t.lambda), t.eps, t.pq)?;
                Ok((h, None))
            }
            HyperSpec::Schedule(s) => {
                let out = schedule::derive(&self.schedule_input(s, inst, lambda)?)?;
                Ok((out.hyper, Some(out)))
            }
        }
    }

    fn schedule_input(&self, s: &ScheduleSpec, inst: &Instance, lambda: Option<f64>) -> Result<ScheduleInput> {
        let consts = inst.oracle.constants();
        let missing =
            |what: &str| HarnessError::Config(format!("schedule needs {what}; the problem does not provide it"));
        let smoothness = s
            .smoothness
            .or(consts.smoothness)
            .ok_or_else(|| missing("smoothness"))?;
        let sigma_sq = s.sigma_sq.or(consts.sigma_sq).ok_or_else(|| missing("sigma_sq"))?;
        let gap = match s.gap {
            Some(g) => g,
            None => {
                let f_star = consts.f_star.ok_or_else(|| missing("gap"))?;
                inst.oracle.value(&inst.x1).map_err(|_| missing("gap"))? - f_star
            }
        };
        let (m, n) = inst.x1.shape();
        let mut input = ScheduleInput::new(self.steps, smoothness, gap, sigma_sq, m, n);
        input.gamma = s.gamma.unwrap_or(1.0);
        input.tau = s.tau.unwrap_or(1.0);
        input.eps_hat = s.eps_hat;
        input.pq = s.pq;
        input.lambda = lambda.or(s.lambda);
        Ok(input)
    }

    /// Replaces the exponent pair wherever the hyperparameters carry one.
    pub fn set_pq(&mut self, pq: ExponentPair) {
        match &mut self.hyper {
            HyperSpec::Explicit(h) => h.pq = pq,
            HyperSpec::Schedule(s) => s.pq = pq,
            HyperSpec::Toy(t) => t.pq = pq,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_example() {
        let cfg: ExperimentConfig = serde_json::from_str(
            r#"{"problem": "toy_paper", "steps": 100000, "seed": 0,
                "hyper": {"toy": {"lambda": 0.001}},
                "sweep": [0.1, 0.01, 0.001, 0.0001, 0.0], "out_dir": "out/toy"}"#,
        )
        .unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.record_interval(), 10);
        let inst = cfg.instance().unwrap();
        let (h, _) = cfg.hyperparams(&inst, None).unwrap();
        assert_eq!(h.lambda, 0.001);
        assert_eq!(h.eps, 1e-12);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        for text in [
            r#"{"problem": "toy_paper", "steps": 10, "hyper": {"toy": {}}, "extra": 1}"#,
            r#"{"problem": "toy_paper", "steps": 10, "hyper": {"toy": {"lambda": 0, "lr": 1}}}"#,
            r#"{"problem": {"quadratic": {"m": 2, "n": 2, "size": 3}}, "steps": 10, "hyper": {"toy": {}}}"#,
            r#"{"problem": "toy_paper", "steps": 10, "hyper": {"explicit": {"eta": 0.1, "theta": 0.9, "beta": 0.93, "lambda": 0, "eps": 1e-8, "gamma": 1}}}"#,
        ] {
            assert!(serde_json::from_str::<ExperimentConfig>(text).is_err(), "{text}");
        }
    }

    #[test]
    fn schedule_reads_problem_constants() {
        let cfg: ExperimentConfig = serde_json::from_str(
            r#"{"problem": {"quadratic": {"m": 2, "n": 3, "noise": 0.5}}, "steps": 10000,
                "hyper": {"schedule": {}}}"#,
        )
        .unwrap();
        let inst = cfg.instance().unwrap();
        let (h, out) = cfg.hyperparams(&inst, None).unwrap();
        let out = out.unwrap();
        assert_eq!(h.lambda, out.lambda_max);
        assert!(out.rate_regime);
        assert!(cfg.hyperparams(&inst, Some(out.lambda_max * 2.0)).is_err());
    }

    #[test]
    fn invalid_values() {
        let base = r#"{"problem": "toy_paper", "steps": 10, "hyper": {"toy": {}}"#;
        for tail in [r#", "sweep": []}"#, r#", "sweep": [-1]}"#, r#", "record_interval": 0}"#] {
            let cfg: ExperimentConfig = serde_json::from_str(&format!("{base}{tail}")).unwrap();
            assert!(matches!(cfg.validate(), Err(HarnessError::Config(_))), "{tail}");
        }
    }
}
