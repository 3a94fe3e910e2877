use shampoo_core::matfun::{fro_norm, Mat};
use shampoo_core::oracles::{finite_diff_grad, toy_sample_grad, MatrixFactorization, QuadraticOracle, ToyProblem};
use shampoo_core::rng;
use shampoo_core::theory::gen::gaussian;
use shampoo_core::GradOracle;

const SAMPLES: u64 = 100_000;

/// Largest `|mean − exact| / SE` over the entries of `N` gradient samples.
fn worst_z(oracle: &dyn GradOracle, x: &Mat, seed: u64) -> f64 {
    let exact = oracle.exact_grad(x).unwrap();
    let (m, n) = exact.shape();
    let mut sum = vec![0.0; m * n];
    let mut sum_sq = vec![0.0; m * n];
    let mut rng = rng::stream(seed, 0);
    for _ in 0..SAMPLES {
        let g = oracle.sample_grad(x, &mut rng).unwrap();
        for (i, v) in g.as_slice().iter().enumerate() {
            sum[i] += v;
            sum_sq[i] += v * v;
        }
    }
    let n_s = SAMPLES as f64;
    let mut worst: f64 = 0.0;
    for i in 0..m * n {
        let mean = sum[i] / n_s;
        let var = (sum_sq[i] / n_s - mean * mean) * n_s / (n_s - 1.0);
        let se = (var / n_s).sqrt();
        worst = worst.max((mean - exact.as_slice()[i]).abs() / se);
    }
    worst
}

#[test]
fn toy_oracle_is_unbiased() {
    let toy = ToyProblem::new();
    let mut rng = rng::stream(1, 0);
    for (i, x) in [toy.initial_point(), gaussian(2, 2, &mut rng).scale(3.0)]
        .iter()
        .enumerate()
    {
        let z = worst_z(&toy, x, 10 + i as u64);
        assert!(z <= 5.0, "z = {z}");
    }
}

#[test]
fn quadratic_oracle_is_unbiased() {
    let q = QuadraticOracle::new(3, 2, 100.0, 0.5, 7).unwrap();
    let mut rng = rng::stream(2, 0);
    for i in 0..2 {
        let x = gaussian(3, 2, &mut rng);
        let z = worst_z(&q, &x, 20 + i);
        assert!(z <= 5.0, "z = {z}");
    }
}

#[test]
fn toy_branches_are_exact() {
    let toy = ToyProblem::new();
    let x = toy.initial_point();
    let d = x.sub(&toy.x_star).unwrap();
    let rare = d.sub(&toy.a).unwrap();
    let common = d.lin_comb(-0.1, &toy.a, 1.0 / 9.0).unwrap();
    let mut rng = rng::stream(5, 0);
    let mut rare_count = 0u32;
    for _ in 0..10_000 {
        let g = toy_sample_grad(&toy, &x, &mut rng).unwrap();
        if g.max_abs_diff(&rare) < 1e-15 {
            rare_count += 1;
        } else {
            assert!(g.max_abs_diff(&common) < 1e-15, "{g:?}");
        }
    }
    // binomial(10⁴, 0.1): sd = 30
    assert!((rare_count as i64 - 1000).abs() < 150, "{rare_count}");
}

fn check_finite_differences(oracle: &dyn GradOracle, seed: u64) {
    let (m, n) = oracle.shape();
    let mut rng = rng::stream(seed, 0);
    for _ in 0..5 {
        let x = gaussian(m, n, &mut rng);
        let fd = finite_diff_grad(oracle, &x, 1e-4).unwrap();
        let exact = oracle.exact_grad(&x).unwrap();
        let err = fd.max_abs_diff(&exact);
        assert!(err <= 1e-6, "err = {err}");
    }
}

#[test]
fn finite_differences_agree() {
    check_finite_differences(&ToyProblem::new(), 30);
    check_finite_differences(&QuadraticOracle::new(3, 4, 10.0, 1.0, 31).unwrap(), 32);
    check_finite_differences(&QuadraticOracle::new(1, 1, 1.0, 0.0, 33).unwrap(), 34);
    check_finite_differences(&MatrixFactorization::new(3, 2, 0.1, 35).unwrap(), 36);
}

#[test]
fn toy_smoothness_identity() {
    let toy = ToyProblem::new();
    let mut rng = rng::stream(40, 0);
    for _ in 0..100 {
        let x = gaussian(2, 2, &mut rng).scale(10.0);
        let y = gaussian(2, 2, &mut rng).scale(10.0);
        let lhs = fro_norm(&toy.exact_grad(&x).unwrap().sub(&toy.exact_grad(&y).unwrap()).unwrap());
        let rhs = 0.01 * fro_norm(&x.sub(&y).unwrap());
        assert!((lhs - rhs).abs() <= 1e-12, "{lhs} vs {rhs}");
    }
}

#[test]
fn quadratic_constants() {
    let q = QuadraticOracle::new(2, 3, 16.0, 0.25, 4).unwrap();
    let c = q.constants();
    assert_eq!(c.smoothness, Some(16.0));
    assert_eq!(c.sigma_sq, Some(6.0 * 0.0625));
    assert_eq!(q.value(q.optimum().unwrap()).unwrap(), 0.0);
    let exact_identity = QuadraticOracle::new(2, 2, 1.0, 0.0, 4).unwrap();
    assert_eq!(exact_identity.h_left(), &Mat::identity(2));
}
