use rand::Rng as _;

use super::gen::{log_uniform, pick_dim, random_matrix, random_psd, MatrixClass};
use super::{stream_id, PropertyReport, Tally, EXACT_TOL, NORM_TOL};
use crate::error::Result;
use crate::matfun::{fro_norm, nuclear_norm, psd_power, schatten_norm, spectral_norm, sym_eig, symmetric_eigen};
use crate::rng::{self, Rng};

const HOLDER: u64 = 1;
const CAUCHY_SCHWARZ: u64 = 2;
const TRACE_ROOT: u64 = 3;
const MONOTONE: u64 = 4;
const AGMG: u64 = 5;
const NORM_CHAIN: u64 = 6;
const PSD_TRACE: u64 = 7;

/// Random conjugate exponents `Σ 1/p_i = 1`, `p_i ∈ [1, ∞]`. With
/// probability 1/4 one exponent is infinite.
fn conjugate_exponents(t: usize, rng: &mut Rng) -> Vec<f64> {
    let mut w: Vec<f64> = (0..t).map(|_| rng.random_range(0.05..1.0)).collect();
    if t > 1 && rng.random_bool(0.25) {
        let i = rng.random_range(0..t);
        w[i] = 0.0;
    }
    let total: f64 = w.iter().sum();
    w.iter()
        .map(|wi| if *wi == 0.0 { f64::INFINITY } else { total / wi })
        .collect()
}

/// `‖A₁⋯A_t‖_{S₁} ≤ Π ‖A_i‖_{S_{p_i}}` for square `A_i` and
/// `Σ 1/p_i = 1`, with `t ∈ {2, 3}`.
pub fn verify_schatten_holder(trials: u64, max_dim: usize, seed: u64) -> PropertyReport {
    let mut tally = Tally::new("schatten_holder", EXACT_TOL, seed);
    tally.config("max_dim", max_dim as f64);
    for i in 0..trials {
        let mut rng = rng::stream(seed, stream_id(HOLDER, i));
        let d = pick_dim(max_dim, &mut rng);
        let t = rng.random_range(2..=3);
        let ps = conjugate_exponents(t, &mut rng);
        let mats: Vec<_> = (0..t)
            .map(|j| random_matrix(d, d, MatrixClass::any(i + j as u64), &mut rng))
            .collect();
        tally.record_result((|| {
            let mut prod = mats[0].clone();
            for a in &mats[1..] {
                prod = prod.matmul(a)?;
            }
            let lhs = nuclear_norm(&prod)?;
            let mut rhs = 1.0;
            for (a, p) in mats.iter().zip(&ps) {
                rhs *= schatten_norm(a, *p)?;
            }
            Ok(vec![(rhs - lhs, rhs)])
        })());
    }
    tally.finish()
}

/// `‖L^α M R^{1−α}‖_op ≤ ‖LM‖_op^α ‖MR‖_op^{1−α}` for positive definite
/// `L`, `R` and `α ∈ [0, 1]`; every third trial uses an endpoint.
pub fn verify_matrix_cauchy_schwarz(trials: u64, max_dim: usize, seed: u64) -> PropertyReport {
    let mut tally = Tally::new("matrix_cauchy_schwarz", EXACT_TOL, seed);
    tally.config("max_dim", max_dim as f64);
    for i in 0..trials {
        let mut rng = rng::stream(seed, stream_id(CAUCHY_SCHWARZ, i));
        let (m, n) = (pick_dim(max_dim, &mut rng), pick_dim(max_dim, &mut rng));
        let l = random_psd(m, MatrixClass::full_rank(i), &mut rng);
        let r = random_psd(n, MatrixClass::full_rank(i / 2), &mut rng);
        let mm = random_matrix(m, n, MatrixClass::any(i / 4), &mut rng);
        let alpha = match i % 6 {
            0 => 0.0,
            3 => 1.0,
            _ => rng.random_range(0.0..=1.0),
        };
        tally.record_result((|| {
            let la = psd_power(&l, alpha)?;
            let rb = psd_power(&r, 1.0 - alpha)?;
            let lhs = spectral_norm(&la.matrix().matmul(&mm)?.matmul(rb.matrix())?)?;
            let lm = spectral_norm(&l.matrix().matmul(&mm)?)?;
            let mr = spectral_norm(&mm.matmul(r.matrix())?)?;
            let rhs = lm.powf(alpha) * mr.powf(1.0 - alpha);
            Ok(vec![(rhs - lhs, rhs)])
        })());
    }
    tally.finish()
}

/// `tr((X+Y)^{1/2}) ≤ tr(X^{1/2}) + tr(Y^{1/2})` for PSD `X`, `Y`.
pub fn verify_trace_root_subadd(trials: u64, max_dim: usize, seed: u64) -> PropertyReport {
    let mut tally = Tally::new("trace_root_subadditivity", EXACT_TOL, seed);
    tally.config("max_dim", max_dim as f64);
    for i in 0..trials {
        let mut rng = rng::stream(seed, stream_id(TRACE_ROOT, i));
        let d = pick_dim(max_dim, &mut rng);
        let x = random_psd(d, MatrixClass::any(i), &mut rng);
        let y = random_psd(d, MatrixClass::any(i / 3), &mut rng);
        tally.record_result((|| {
            let lhs = sym_eig(&x.combine(1.0, &y, 1.0)?)?.trace_power(0.5)?;
            let rhs = sym_eig(&x)?.trace_power(0.5)? + sym_eig(&y)?.trace_power(0.5)?;
            Ok(vec![(rhs - lhs, rhs)])
        })());
    }
    tally.finish()
}

/// `X ⪯ Y ⇒ X^t ⪯ Y^t` for `t ∈ [0, 1]`: the smallest eigenvalue of
/// `Y^t − X^t` is nonnegative. `X` is positive definite, `Y = X + P` with
/// `P` PSD (possibly singular).
pub fn verify_operator_monotone(trials: u64, max_dim: usize, seed: u64) -> PropertyReport {
    let mut tally = Tally::new("operator_monotone", EXACT_TOL, seed);
    tally.config("max_dim", max_dim as f64);
    for i in 0..trials {
        let mut rng = rng::stream(seed, stream_id(MONOTONE, i));
        let d = pick_dim(max_dim, &mut rng);
        let x = random_psd(d, MatrixClass::full_rank(i), &mut rng);
        let p = random_psd(d, MatrixClass::any(i / 2), &mut rng);
        let t = match i % 10 {
            0 => 0.0,
            5 => 1.0,
            _ => rng.random_range(0.0..=1.0),
        };
        tally.record_result((|| {
            let y = x.combine(1.0, &p, 1.0)?;
            let yt = psd_power(&y, t)?;
            let xt = psd_power(&x, t)?;
            let diff = symmetric_eigen(&yt.matrix().sub(xt.matrix())?)?;
            let scale = sym_eig(&yt)?.max_eigenvalue();
            Ok(vec![(diff.min_eigenvalue(), scale)])
        })());
    }
    tally.finish()
}

/// `x^a y^b ≤ a x + b y` for `x, y ≥ 0`, `a + b = 1`.
pub fn verify_agmg(trials: u64, seed: u64) -> PropertyReport {
    let mut tally = Tally::new("weighted_am_gm", EXACT_TOL, seed);
    for i in 0..trials {
        let mut rng = rng::stream(seed, stream_id(AGMG, i));
        let draw = |rng: &mut Rng| match rng.random_range(0..10) {
            0 => 0.0,
            _ => log_uniform(-6.0, 6.0, rng),
        };
        let x = draw(&mut rng);
        let y = if i % 7 == 0 { x } else { draw(&mut rng) };
        let a = match i % 11 {
            0 => 1.0,
            1 => 0.0,
            _ => rng.random_range(0.0..=1.0),
        };
        let b = 1.0 - a;
        let lhs = x.powf(a) * y.powf(b);
        let rhs = a * x + b * y;
        tally.record(&[(rhs - lhs, rhs)]);
    }
    tally.finish()
}

fn chain_margins(a: &crate::matfun::Mat) -> Result<Vec<(f64, f64)>> {
    let r = a.rows().min(a.cols()) as f64;
    let fro = fro_norm(a);
    let nuc = nuclear_norm(a)?;
    let spec = spectral_norm(a)?;
    Ok(vec![
        (nuc - fro, nuc),
        (r.sqrt() * fro - nuc, r.sqrt() * fro),
        (r * spec - nuc, r * spec),
        (fro - spec, fro),
    ])
}

/// `‖A‖_op ≤ ‖A‖_F ≤ ‖A‖_* ≤ √r‖A‖_F` and `‖A‖_* ≤ r‖A‖_op`, with
/// `r = min(m, n)`, over all dimension pairs.
pub fn verify_norm_chain(trials: u64, seed: u64) -> PropertyReport {
    let mut tally = Tally::new("norm_chain", NORM_TOL, seed);
    for i in 0..trials {
        let mut rng = rng::stream(seed, stream_id(NORM_CHAIN, i));
        let (m, n) = (pick_dim(8, &mut rng), pick_dim(8, &mut rng));
        let a = random_matrix(m, n, MatrixClass::any(i), &mut rng);
        tally.record_result(chain_margins(&a));
    }
    tally.finish()
}

/// For PSD `S`, singular values and eigenvalues coincide, so
/// `‖S‖_* = tr(S)`.
pub fn verify_psd_trace_identity(trials: u64, seed: u64) -> PropertyReport {
    let mut tally = Tally::new("psd_trace_identity", NORM_TOL, seed);
    for i in 0..trials {
        let mut rng = rng::stream(seed, stream_id(PSD_TRACE, i));
        let d = pick_dim(8, &mut rng);
        let s = random_psd(d, MatrixClass::any(i), &mut rng);
        tally.record_result((|| {
            let tr = s.trace();
            Ok(vec![(-(nuclear_norm(s.matrix())? - tr).abs(), tr)])
        })());
    }
    tally.finish()
}
