use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::ExponentPair;

fn default_root_interval() -> u64 {
    1
}

/// Step size, moment decays, weight decay, shift, and exponent pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hyperparams {
    pub eta: f64,
    pub theta: f64,
    pub beta: f64,
    pub lambda: f64,
    pub eps: f64,
    #[serde(default)]
    pub pq: ExponentPair,
    /// Recompute preconditioner roots every this many steps. `1` is exact.
    #[serde(default = "default_root_interval")]
    pub root_interval: u64,
}

impl Hyperparams {
    /// Shampoo exponents, roots refreshed every step.
    pub fn new(eta: f64, theta: f64, beta: f64, lambda: f64, eps: f64) -> Self {
        Self {
            eta,
            theta,
            beta,
            lambda,
            eps,
            pq: ExponentPair::shampoo(),
            root_interval: 1,
        }
    }

    pub fn with_pq(mut self, pq: ExponentPair) -> Self {
        self.pq = pq;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::InvalidParameter(format!("{what} = {v}")));
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return bad("eta must be finite and > 0, got eta", self.eta);
        }
        if !(0.0..1.0).contains(&self.theta) {
            return bad("theta must lie in [0, 1), got theta", self.theta);
        }
        if !(0.0..1.0).contains(&self.beta) {
            return bad("beta must lie in [0, 1), got beta", self.beta);
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return bad("lambda must be finite and >= 0, got lambda", self.lambda);
        }
        if !(self.eps.is_finite() && self.eps > 0.0) {
            return bad("eps must be finite and > 0, got eps", self.eps);
        }
        if self.root_interval == 0 {
            return Err(Error::InvalidParameter("root_interval must be >= 1".into()));
        }
        Ok(())
    }

    /// `θ ≤ β ≤ √θ < 1`, the range in which the update norm is bounded by 2.
    pub fn in_rate_regime(&self) -> bool {
        self.theta <= self.beta && self.beta <= self.theta.sqrt() && self.theta.sqrt() < 1.0
    }
}
