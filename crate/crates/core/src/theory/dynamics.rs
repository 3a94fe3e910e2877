use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use super::gen::{gaussian, log_uniform, pick_dim};
use super::{stream_id, PropertyReport, Tally, EXACT_TOL};
use crate::error::Result;
use crate::exponent::ExponentPair;
use crate::matfun::{spectral_norm, Mat};
use crate::optimizer::{Hyperparams, OptimizerState};
use crate::rng::{self, Rng};
use crate::schedule::{check_regime, RegimeReport};

const UPDATE: u64 = 8;
const CONFINEMENT: u64 = 9;

/// Bound on the preconditioned momentum norm.
pub const UPDATE_BOUND: f64 = 2.0;

/// Gradient sequences used to drive the optimizer.
#[derive(Debug, Clone, Copy)]
enum Stream {
    Gaussian(f64),
    /// Ratio of normals, so entries are Cauchy distributed.
    HeavyTailed(f64),
    Constant,
    /// Magnitude redrawn over six decades every step.
    ScaleSwitching,
    /// Mostly zero with occasional large bursts.
    Bursty,
}

impl Stream {
    fn pick(i: u64, rng: &mut Rng) -> Self {
        match i % 5 {
            0 => Stream::Gaussian(log_uniform(-3.0, 3.0, rng)),
            1 => Stream::HeavyTailed(log_uniform(-3.0, 3.0, rng)),
            2 => Stream::Constant,
            3 => Stream::ScaleSwitching,
            _ => Stream::Bursty,
        }
    }

    fn next(&self, fixed: &Mat, rng: &mut Rng) -> Mat {
        let (m, n) = fixed.shape();
        match *self {
            Stream::Gaussian(s) => gaussian(m, n, rng).scale(s),
            Stream::HeavyTailed(s) => {
                let data = (0..m * n)
                    .map(|_| {
                        let num: f64 = StandardNormal.sample(rng);
                        let den: f64 = StandardNormal.sample(rng);
                        let v = s * num / den;
                        if v.is_finite() {
                            v
                        } else {
                            0.0
                        }
                    })
                    .collect();
                Mat::from_raw(m, n, data)
            }
            Stream::Constant => fixed.clone(),
            Stream::ScaleSwitching => {
                let s = log_uniform(-3.0, 3.0, rng);
                gaussian(m, n, rng).scale(s)
            }
            Stream::Bursty => match rng.random_bool(0.2) {
                true => gaussian(m, n, rng).scale(log_uniform(0.0, 3.0, rng)),
                false => Mat::zeros(m, n),
            },
        }
    }
}

/// `θ` either uniform in `[0, 1)` or close to 1, and `β` uniform in
/// `[θ, √θ]`.
fn regime_moments(i: u64, rng: &mut Rng) -> (f64, f64) {
    let theta = match i % 2 {
        0 => rng.random_range(0.0..1.0),
        _ => 1.0 - log_uniform(-4.0, 0.0, rng),
    };
    let beta = theta + rng.random_range(0.0..=1.0) * (theta.sqrt() - theta);
    (theta, beta.clamp(theta, theta.sqrt()))
}

/// Every step of every trajectory has update norm at most 2 when
/// `θ ≤ β ≤ √θ < 1`. Each trajectory drives the four exponent pairs
/// `(2,2), (4,4/3), (1,∞), (∞,1)` with the same gradient sequence.
pub fn verify_update_bound(trials: u64, max_dim: usize, steps: u64, seed: u64) -> PropertyReport {
    let mut tally = Tally::new("update_bound", EXACT_TOL, seed);
    tally.config("max_dim", max_dim as f64).config("steps", steps as f64);
    let pairs = [
        ExponentPair::shampoo(),
        ExponentPair::two_sided(4.0).expect("conjugate"),
        ExponentPair::left_only(),
        ExponentPair::right_only(),
    ];
    for i in 0..trials {
        let mut rng = rng::stream(seed, stream_id(UPDATE, i));
        let (m, n) = (pick_dim(max_dim, &mut rng), pick_dim(max_dim, &mut rng));
        let (theta, beta) = regime_moments(i, &mut rng);
        let eps = log_uniform(-12.0, 0.0, &mut rng);
        let lambda = rng.random_range(0.0..0.1);
        let stream = Stream::pick(i, &mut rng);
        let fixed = gaussian(m, n, &mut rng).scale(log_uniform(-3.0, 3.0, &mut rng));
        let x1 = gaussian(m, n, &mut rng);
        let hypers: Vec<Hyperparams> = pairs
            .iter()
            .map(|pq| Hyperparams::new(0.01, theta, beta, lambda, eps).with_pq(*pq))
            .collect();
        tally.record_result((|| {
            let mut states = hypers
                .iter()
                .map(|h| OptimizerState::init(x1.clone(), h))
                .collect::<Result<Vec<_>>>()?;
            let mut margins = Vec::with_capacity((steps as usize) * pairs.len());
            for _ in 0..steps {
                let g = stream.next(&fixed, &mut rng);
                for (state, h) in states.iter_mut().zip(&hypers) {
                    let (next, diag) = state.step(&g, h)?;
                    *state = next;
                    margins.push((UPDATE_BOUND - diag.update_op_norm, UPDATE_BOUND));
                }
            }
            Ok(margins)
        })());
    }
    tally.finish()
}

/// Inputs of one weight-confinement run.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfinementCase {
    pub hyper: Hyperparams,
    pub steps: u64,
    pub nu: f64,
    pub x1: Mat,
    /// Gradients are `scale · G` with `G` standard normal, plus `push · X_k`
    /// to drive the iterates outward.
    pub noise_scale: f64,
    pub push: f64,
    pub seed: u64,
    pub stream: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConfinementOutcome {
    /// A hypothesis failed; the run was not performed.
    NotApplicable(RegimeReport),
    Evaluated {
        /// `3√ν / K^{1/4}`
        bound: f64,
        /// Largest `λ‖X_k‖_op` over `k = 1, …, K+1`.
        max_lambda_x: f64,
        /// Largest `‖X_k‖_op` over the same range.
        max_x: f64,
    },
}

/// Runs one case if its hypotheses hold.
pub fn confinement_case(case: &ConfinementCase) -> Result<ConfinementOutcome> {
    let regime = check_regime(&case.hyper, case.steps, case.nu, &case.x1);
    if !regime.all_pass() || !case.hyper.in_rate_regime() {
        return Ok(ConfinementOutcome::NotApplicable(regime));
    }
    let lambda = case.hyper.lambda;
    let mut rng = rng::stream(case.seed, case.stream);
    let mut state = OptimizerState::init(case.x1.clone(), &case.hyper)?;
    let mut max_x = spectral_norm(&case.x1)?;
    let (m, n) = case.x1.shape();
    for _ in 0..case.steps {
        let g = gaussian(m, n, &mut rng).lin_comb(case.noise_scale, &state.x, case.push)?;
        let (next, diag) = state.step(&g, &case.hyper)?;
        state = next;
        max_x = max_x.max(diag.x_op_norm);
    }
    Ok(ConfinementOutcome::Evaluated {
        bound: RegimeReport::confinement_bound(case.nu, case.steps),
        max_lambda_x: lambda * max_x,
        max_x,
    })
}

/// Samples cases that satisfy every hypothesis, some of them with equality,
/// and checks `λ‖X_k‖_op ≤ 3√ν/K^{1/4}` along the run. When
/// `3√ν/K^{1/4} < 1` it also checks `‖X_k‖_op < 1/λ`.
pub fn verify_weight_confinement(trials: u64, seed: u64) -> PropertyReport {
    let mut tally = Tally::new("weight_confinement", EXACT_TOL, seed);
    for i in 0..trials {
        let stream = stream_id(CONFINEMENT, i);
        let mut rng = rng::stream(seed, stream);
        let case = sample_case(i, seed, stream, &mut rng);
        match confinement_case(&case) {
            Ok(ConfinementOutcome::NotApplicable(_)) => tally.not_applicable(),
            Ok(ConfinementOutcome::Evaluated {
                bound,
                max_lambda_x,
                max_x,
            }) => {
                let mut margins = vec![(bound - max_lambda_x, bound)];
                if bound < 1.0 && case.hyper.lambda > 0.0 {
                    let inv = 1.0 / case.hyper.lambda;
                    margins.push((inv - max_x, inv));
                }
                tally.record(&margins);
            }
            Err(e) => tally.record_result(Err(e)),
        }
    }
    tally.finish()
}

fn sample_case(i: u64, seed: u64, stream: u64, rng: &mut Rng) -> ConfinementCase {
    let steps = log_uniform(1.3, 2.6, rng).round() as u64;
    let k = steps as f64;
    let (m, n) = (pick_dim(6, rng), pick_dim(6, rng));
    // √ν / K^{1/4} = c
    let c = log_uniform(-3.0, 0.0, rng);
    let nu = c * c * k.sqrt();
    let lambda = match i % 10 {
        0 => 0.0,
        _ => log_uniform(-4.0, 0.0, rng),
    };
    let tight = i.is_multiple_of(3);
    let eta_frac = if tight { 1.0 } else { rng.random_range(0.01..=1.0) };
    let x_frac = if tight { 1.0 } else { rng.random_range(0.0..=1.0) };
    let eta = match lambda {
        0.0 => log_uniform(-4.0, -1.0, rng),
        _ => eta_frac * nu.sqrt() / (2.0 * k.powf(1.25) * lambda),
    };
    let x1_target = match lambda {
        0.0 => 1.0,
        _ => x_frac * nu.sqrt() / (k.powf(0.25) * lambda),
    };
    let x1 = {
        let raw = gaussian(m, n, rng);
        let norm = spectral_norm(&raw).unwrap_or(1.0);
        if norm > 0.0 {
            raw.scale(x1_target / norm)
        } else {
            raw
        }
    };
    let (theta, beta) = regime_moments(i, rng);
    let eps = log_uniform(-12.0, 0.0, rng);
    let noise_scale = log_uniform(-3.0, 3.0, rng);
    // negative push points the update along +X
    let push = match i % 2 {
        0 => 0.0,
        _ => -log_uniform(-2.0, 2.0, rng),
    };
    ConfinementCase {
        hyper: Hyperparams::new(eta, theta, beta, lambda, eps),
        steps,
        nu,
        x1,
        noise_scale,
        push,
        seed,
        stream,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_gives_zero_update() {
        let h = Hyperparams::new(0.1, 0.5, 0.6, 0.0, 1e-6);
        let s = OptimizerState::init(Mat::identity(2), &h).unwrap();
        let (_, d) = s.step(&Mat::zeros(2, 2), &h).unwrap();
        assert_eq!(d.update_op_norm, 0.0);
    }

    #[test]
    fn violated_hypothesis_is_not_applicable() {
        let case = ConfinementCase {
            hyper: Hyperparams::new(1e-3, 0.9, 0.93, 0.1, 1e-8),
            steps: 100,
            nu: 1.0,
            x1: Mat::identity(2).scale(1e6),
            noise_scale: 1.0,
            push: 0.0,
            seed: 0,
            stream: 0,
        };
        match confinement_case(&case).unwrap() {
            ConfinementOutcome::NotApplicable(r) => assert!(!r.get("x1_op_norm").unwrap().pass),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_decay_margin_is_the_bound() {
        let case = ConfinementCase {
            hyper: Hyperparams::new(1e-3, 0.9, 0.93, 0.0, 1e-8),
            steps: 50,
            nu: 0.01,
            x1: Mat::identity(2),
            noise_scale: 1.0,
            push: 0.0,
            seed: 0,
            stream: 0,
        };
        match confinement_case(&case).unwrap() {
            ConfinementOutcome::Evaluated {
                bound, max_lambda_x, ..
            } => {
                assert_eq!(max_lambda_x, 0.0);
                assert!(bound > 0.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn suites_pass_small() {
        let r = verify_update_bound(10, 6, 50, 3);
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.trials, 10);
        let r = verify_weight_confinement(10, 3);
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.not_applicable, 0, "{r:?}");
    }
}
