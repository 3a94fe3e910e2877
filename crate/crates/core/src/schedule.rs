//! Hyperparameters derived from problem constants, and the hypotheses under
//! which weight decay keeps the iterates bounded.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::ExponentPair;
use crate::matfun::{spectral_norm, Mat};
use crate::optimizer::Hyperparams;

/// Relative slack for the regime checks. With `λ = λ_max` the step-size and
/// starting-point hypotheses hold with equality, so they are compared up to
/// rounding.
pub const REGIME_RTOL: f64 = 1e-12;

const NU_DENOM: f64 = 1152.0;

fn one() -> f64 {
    1.0
}

/// Problem constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleInput {
    /// Number of steps `K`.
    pub steps: u64,
    /// Gradient Lipschitz constant `L`.
    pub smoothness: f64,
    /// `Δ = f(X₁) − f*`.
    pub gap: f64,
    /// Gradient noise bound `σ²`.
    pub sigma_sq: f64,
    /// `γ ∈ (0, 1]`.
    #[serde(default = "one")]
    pub gamma: f64,
    /// `τ ∈ (0, 1]`, scales `ε` down.
    #[serde(default = "one")]
    pub tau: f64,
    /// Lower bound `ε̂ ≥ ε` on the spectrum of the shifted preconditioners.
    /// Defaults to `ε`.
    #[serde(default)]
    pub eps_hat: Option<f64>,
    pub m: usize,
    pub n: usize,
    #[serde(default)]
    pub pq: ExponentPair,
    /// Weight decay; defaults to `λ_max` and may not exceed it.
    #[serde(default)]
    pub lambda: Option<f64>,
}

impl ScheduleInput {
    pub fn new(steps: u64, smoothness: f64, gap: f64, sigma_sq: f64, m: usize, n: usize) -> Self {
        Self {
            steps,
            smoothness,
            gap,
            sigma_sq,
            gamma: 1.0,
            tau: 1.0,
            eps_hat: None,
            m,
            n,
            pq: ExponentPair::shampoo(),
            lambda: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScheduleOutput {
    pub hyper: Hyperparams,
    pub sigma_hat_sq: f64,
    pub eps_hat: f64,
    pub lambda_max: f64,
    pub nu: f64,
    pub x1_op_bound: f64,
    /// Bound on the average expected nuclear norm of the gradient.
    pub rate_bound: f64,
    pub rate_regime: bool,
}

/// Evaluates the step count dependent settings:
///
/// ```text
/// σ̂² = max{σ², LΔ/(Kγ²)}        1−θ = √(LΔ/(Kσ̂²))      β = √θ
/// ε  = τσ̂²/(m+n)                η   = √(ε̂Δ/(4LKσ̂²))
/// λ_max = K^{-3/4} (L³σ̂²/Δ)^{1/4} / √(1152 ε̂)
/// ν  = √(LΔ/σ̂²) / 1152          ‖X₁‖_op ≤ √(ε̂KΔ/(Lσ̂²))
/// ```
pub fn derive(input: &ScheduleInput) -> Result<ScheduleOutput> {
    let ScheduleInput {
        steps,
        smoothness: l,
        gap,
        sigma_sq,
        gamma,
        tau,
        eps_hat,
        m,
        n,
        pq,
        lambda,
    } = *input;
    let infeasible = |msg: String| Err(Error::InfeasibleSchedule(msg));
    if steps == 0 {
        return infeasible("K must be >= 1".into());
    }
    if !(gap.is_finite() && gap > 0.0) {
        return infeasible(format!("gap f(X1) - f* must be > 0, got {gap}"));
    }
    if !(l.is_finite() && l > 0.0) {
        return infeasible(format!("smoothness L must be > 0, got {l}"));
    }
    if !(sigma_sq.is_finite() && sigma_sq >= 0.0) {
        return infeasible(format!("sigma^2 must be >= 0, got {sigma_sq}"));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return infeasible(format!("gamma must lie in (0, 1], got {gamma}"));
    }
    if !(tau > 0.0 && tau <= 1.0) {
        return infeasible(format!("tau must lie in (0, 1], got {tau}"));
    }
    if m == 0 || n == 0 {
        return infeasible(format!("dimensions must be positive, got {m}x{n}"));
    }

    let k = steps as f64;
    let l_gap = l * gap;
    let sigma_hat_sq = sigma_sq.max(l_gap / (k * gamma * gamma));
    let one_minus_theta = (l_gap / (k * sigma_hat_sq)).sqrt();
    let theta = 1.0 - one_minus_theta;
    if !(0.0..1.0).contains(&theta) {
        return infeasible(format!("theta = {theta} outside [0, 1); K = {steps} is too small"));
    }
    let beta = theta.sqrt();
    let eps = tau * sigma_hat_sq / (m + n) as f64;
    let eps_hat = eps_hat.unwrap_or(eps);
    if !(eps_hat.is_finite() && eps_hat >= eps) {
        return infeasible(format!("eps_hat = {eps_hat} must be >= eps = {eps}"));
    }
    let eta = (eps_hat * gap / (4.0 * l * k * sigma_hat_sq)).sqrt();
    let lambda_max = k.powf(-0.75) * (l.powi(3) * sigma_hat_sq / gap).powf(0.25) / (NU_DENOM * eps_hat).sqrt();
    let lambda = match lambda {
        None => lambda_max,
        Some(v) if v >= 0.0 && v <= lambda_max => v,
        Some(v) => return infeasible(format!("lambda = {v} must lie in [0, lambda_max = {lambda_max}]")),
    };
    let nu = (l_gap / sigma_hat_sq).sqrt() / NU_DENOM;
    let x1_op_bound = (eps_hat * k * gap / (l * sigma_hat_sq)).sqrt();
    let rate_bound = (8.0 * ((m + n) as f64).sqrt() + 119.0 * sigma_hat_sq.sqrt() / eps_hat.sqrt())
        * (sigma_sq * l_gap / k).powf(0.25).max((l_gap / (k * gamma)).sqrt());

    let hyper = Hyperparams {
        eta,
        theta,
        beta,
        lambda,
        eps,
        pq,
        root_interval: 1,
    };
    hyper.validate().map_err(|e| Error::InfeasibleSchedule(e.to_string()))?;
    let out = ScheduleOutput {
        hyper,
        sigma_hat_sq,
        eps_hat,
        lambda_max,
        nu,
        x1_op_bound,
        rate_bound,
        rate_regime: hyper.in_rate_regime(),
    };
    if ![sigma_hat_sq, lambda_max, nu, x1_op_bound, rate_bound]
        .iter()
        .all(|v| v.is_finite())
    {
        return infeasible(format!("non-finite derived quantity in {out:?}"));
    }
    Ok(out)
}

/// Hyperparameters used verbatim, as for the toy experiment:
/// `θ = 1 − 1/√K`, `β = √θ`, `η = 1/√K`.
pub fn toy_passthrough(steps: u64, lambda: f64, eps: f64, pq: ExponentPair) -> Result<Hyperparams> {
    if steps < 2 {
        return Err(Error::InfeasibleSchedule(format!(
            "toy settings need K >= 2, got {steps}"
        )));
    }
    let root_k = (steps as f64).sqrt();
    let theta = 1.0 - 1.0 / root_k;
    let hyper = Hyperparams {
        eta: 1.0 / root_k,
        theta,
        beta: theta.sqrt(),
        lambda,
        eps,
        pq,
        root_interval: 1,
    };
    hyper.validate()?;
    Ok(hyper)
}

/// One hypothesis `lhs ≤ rhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

impl HypothesisCheck {
    fn new(name: &'static str, lhs: f64, rhs: f64) -> Self {
        let pass = lhs <= rhs || lhs <= rhs + REGIME_RTOL * rhs.abs();
        Self { name, lhs, rhs, pass }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeReport {
    pub checks: Vec<HypothesisCheck>,
}

impl RegimeReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// `3√ν / K^{1/4}`, the bound on `λ‖X_k‖_op` when every check passes.
    pub fn confinement_bound(nu: f64, steps: u64) -> f64 {
        3.0 * nu.sqrt() / (steps as f64).powf(0.25)
    }
}

/// Checks the hypotheses that keep `λ‖X_k‖_op ≤ 3√ν/K^{1/4}` for `K` steps:
///
/// - `ηλ ≤ √ν / (2K^{5/4})`
/// - `‖X₁‖_op ≤ √ν / (K^{1/4} λ)`
/// - `√ν / K^{1/4} ≤ 1`
/// - `θ ≤ β ≤ √θ`
pub fn check_regime(hyper: &Hyperparams, steps: u64, nu: f64, x1: &Mat) -> RegimeReport {
    let k = steps as f64;
    let root_nu = nu.sqrt();
    let x1_norm = spectral_norm(x1).unwrap_or(f64::NAN);
    let x1_rhs = match hyper.lambda {
        0.0 => f64::INFINITY,
        lam => root_nu / (k.powf(0.25) * lam),
    };
    RegimeReport {
        checks: vec![
            HypothesisCheck::new("eta_lambda", hyper.eta * hyper.lambda, root_nu / (2.0 * k.powf(1.25))),
            HypothesisCheck::new("x1_op_norm", x1_norm, x1_rhs),
            HypothesisCheck::new("nu_scale", root_nu / k.powf(0.25), 1.0),
            HypothesisCheck::new("theta_le_beta", hyper.theta, hyper.beta),
            HypothesisCheck::new("beta_le_sqrt_theta", hyper.beta, hyper.theta.sqrt()),
        ],
    }
}
