use nalgebra::DMatrix;
use proptest::prelude::*;
use rand_distr::{Distribution, StandardNormal};
use shampoo_core::matfun::{fro_norm, nuclear_norm, Mat};
use shampoo_core::optimizer::{run, RunOptions};
use shampoo_core::rng::{self, Rng};
use shampoo_core::{ExponentPair, GradOracle, Hyperparams, OptimizerState, TraceRecord};

/// `f(x) = (x − 2)² / 2` with unit Gaussian gradient noise.
struct Scalar;

impl GradOracle for Scalar {
    fn shape(&self) -> (usize, usize) {
        (1, 1)
    }

    fn sample_grad(&self, x: &Mat, rng: &mut Rng) -> shampoo_core::Result<Mat> {
        let z: f64 = StandardNormal.sample(rng);
        Mat::new(1, 1, vec![x.get(0, 0) - 2.0 + z])
    }

    fn exact_grad(&self, x: &Mat) -> shampoo_core::Result<Mat> {
        Mat::new(1, 1, vec![x.get(0, 0) - 2.0])
    }
}

/// Plain-float recurrence of the optimizer on a 1×1 problem.
fn scalar_reference(h: &Hyperparams, x1: f64, steps: u64, seed: u64) -> Vec<f64> {
    let mut rng = rng::stream(seed, 0);
    let (mut x, mut m, mut l, mut r) = (x1, 0.0, 0.0, 0.0);
    let mut xs = vec![x];
    for _ in 0..steps {
        let z: f64 = StandardNormal.sample(&mut rng);
        let g = x - 2.0 + z;
        m = h.theta * m + (1.0 - h.theta) * g;
        l = h.beta * l + (1.0 - h.beta) * g * g;
        r = h.beta * r + (1.0 - h.beta) * g * g;
        let left = h.pq.left_power();
        let right = h.pq.right_power();
        let u = (l + h.eps).powf(left) * m * (r + h.eps).powf(right);
        x = (1.0 - h.lambda * h.eta) * x - h.eta * u;
        xs.push(x);
    }
    xs
}

#[test]
fn scalar_trajectory_matches_reference() {
    let pairs = [
        ExponentPair::shampoo(),
        ExponentPair::two_sided(4.0).unwrap(),
        ExponentPair::left_only(),
        ExponentPair::right_only(),
    ];
    for (i, pq) in pairs.into_iter().enumerate() {
        let h = Hyperparams::new(1e-2, 0.9, 0.93, 0.05, 1e-8).with_pq(pq);
        let seed = 11 + i as u64;
        let reference = scalar_reference(&h, -1.5, 10_000, seed);
        let mut state = OptimizerState::init(Mat::new(1, 1, vec![-1.5]).unwrap(), &h).unwrap();
        let mut rng = rng::stream(seed, 0);
        let mut worst: f64 = 0.0;
        for want in &reference[1..] {
            let g = Scalar.sample_grad(&state.x, &mut rng).unwrap();
            state = state.step(&g, &h).unwrap().0;
            worst = worst.max((state.x.get(0, 0) - want).abs());
        }
        assert!(worst <= 1e-12, "{pq}: {worst}");
        let summary = run(
            &Scalar,
            Mat::new(1, 1, vec![-1.5]).unwrap(),
            &h,
            &RunOptions::new(10_000, seed),
            &mut Vec::new(),
        )
        .unwrap();
        assert!((summary.final_state.x.get(0, 0) - reference[10_000]).abs() <= 1e-12);
    }
}

fn small_matrix() -> impl Strategy<Value = Mat> {
    (1usize..=4, 1usize..=4).prop_flat_map(|(m, n)| {
        prop::collection::vec(-5.0f64..5.0, m * n).prop_map(move |v| Mat::new(m, n, v).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// After `k` steps, `M_k = (1−θ)Σ θ^{k−t} G_t` and likewise for `L`, `R`.
    #[test]
    fn moments_match_closed_form(
        g0 in small_matrix(),
        scales in prop::collection::vec(-3.0f64..3.0, 1..12),
        theta in 0.0f64..0.99,
        beta_frac in 0.0f64..=1.0,
    ) {
        let beta = theta + beta_frac * (theta.sqrt() - theta);
        let h = Hyperparams::new(1e-2, theta, beta, 0.1, 1e-6);
        let grads: Vec<Mat> = scales.iter().enumerate()
            .map(|(t, s)| g0.map(|v| v * s + t as f64 * 0.1))
            .collect();
        let mut state = OptimizerState::init(g0.map(|v| -v), &h).unwrap();
        for g in &grads {
            state = state.step(g, &h).unwrap().0;
        }
        let k = grads.len();
        let (m, n) = g0.shape();
        let (mut mm, mut ll, mut rr) = (Mat::zeros(m, n), Mat::zeros(m, m), Mat::zeros(n, n));
        for (t, g) in grads.iter().enumerate() {
            let wm = (1.0 - theta) * theta.powi((k - 1 - t) as i32);
            let wb = (1.0 - beta) * beta.powi((k - 1 - t) as i32);
            mm = mm.lin_comb(1.0, g, wm).unwrap();
            ll = ll.lin_comb(1.0, &g.matmul(&g.transpose()).unwrap(), wb).unwrap();
            rr = rr.lin_comb(1.0, &g.transpose().matmul(g).unwrap(), wb).unwrap();
        }
        let tol = 1e-12 * (1.0 + fro_norm(&ll));
        prop_assert!(state.m_mom.max_abs_diff(&mm) <= 1e-12 * (1.0 + fro_norm(&mm)));
        prop_assert!(state.l.matrix().max_abs_diff(&ll) <= tol);
        prop_assert!(state.r.matrix().max_abs_diff(&rr) <= tol);
        prop_assert_eq!(state.k, k as u64);
    }

    /// With `(∞, 1)` the update is `M R_ε^{-1/2}`.
    #[test]
    fn right_only_step_uses_right_root_only(g in small_matrix(), steps in 1usize..6) {
        let h = Hyperparams::new(0.05, 0.5, 0.6, 0.0, 1e-6).with_pq(ExponentPair::right_only());
        let (m, n) = g.shape();
        let x1 = Mat::zeros(m, n);
        let mut a = OptimizerState::init(x1.clone(), &h).unwrap();
        for _ in 0..steps {
            a = a.step(&g, &h).unwrap().0;
        }
        let r = DMatrix::from_row_slice(n, n, a.r.matrix().as_slice());
        let e = r.symmetric_eigen();
        let d = DMatrix::from_diagonal(&e.eigenvalues.map(|l| (l.max(0.0) + 1e-6).powf(-0.5)));
        let root = &e.eigenvectors * d * e.eigenvectors.transpose();
        let mut b = OptimizerState::init(x1, &h).unwrap();
        for _ in 0..steps - 1 {
            b = b.step(&g, &h).unwrap().0;
        }
        let m_na = DMatrix::from_row_slice(m, n, a.m_mom.as_slice());
        let upd = m_na * root;
        let x_prev = DMatrix::from_row_slice(m, n, b.x.as_slice());
        let want = x_prev - upd * 0.05;
        let got = DMatrix::from_row_slice(m, n, a.x.as_slice());
        prop_assert!((got - &want).amax() <= 1e-10 * (1.0 + want.amax()));
    }
}

#[test]
fn right_only_is_invariant_to_left_history() {
    // G and QG share GᵀG but not GGᵀ
    let h_r = Hyperparams::new(0.05, 0.5, 0.6, 0.0, 1e-6).with_pq(ExponentPair::right_only());
    let g = Mat::from_rows(&[&[1.0, 2.0, 0.0], &[0.5, -1.0, 3.0]]).unwrap();
    let q = Mat::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
    let qg = q.matmul(&g).unwrap();
    let x1 = Mat::zeros(2, 3);
    let a = OptimizerState::init(x1.clone(), &h_r)
        .unwrap()
        .step(&g, &h_r)
        .unwrap()
        .0;
    let b = OptimizerState::init(x1, &h_r).unwrap().step(&qg, &h_r).unwrap().0;
    assert_ne!(a.l, b.l);
    assert_eq!(a.r, b.r);
    assert!(q.matmul(&a.x).unwrap().max_abs_diff(&b.x) < 1e-15);
}

#[test]
fn trace_running_averages_are_prefix_means() {
    let h = Hyperparams::new(1e-2, 0.9, 0.93, 0.0, 1e-8);
    let mut trace: Vec<TraceRecord> = Vec::new();
    let opts = RunOptions {
        steps: 500,
        seed: 3,
        record_interval: 1,
    };
    run(&Scalar, Mat::new(1, 1, vec![5.0]).unwrap(), &h, &opts, &mut trace).unwrap();
    assert_eq!(trace.len(), 500);
    let (mut fro, mut nuc) = (0.0, 0.0);
    for (i, rec) in trace.iter().enumerate() {
        fro += rec.grad_fro.unwrap();
        nuc += rec.grad_nuclear.unwrap();
        let k = (i + 1) as f64;
        assert_eq!(rec.k, i as u64 + 1);
        assert!((rec.run_avg_grad_fro.unwrap() - fro / k).abs() <= 1e-12);
        assert!((rec.run_avg_grad_nuclear.unwrap() - nuc / k).abs() <= 1e-12);
    }
}

#[test]
fn trace_gradient_columns_describe_current_iterate() {
    let h = Hyperparams::new(1e-2, 0.9, 0.93, 0.0, 1e-8);
    let mut trace: Vec<TraceRecord> = Vec::new();
    let opts = RunOptions {
        steps: 3,
        seed: 0,
        record_interval: 1,
    };
    run(&Scalar, Mat::new(1, 1, vec![5.0]).unwrap(), &h, &opts, &mut trace).unwrap();
    let g1 = Mat::new(1, 1, vec![3.0]).unwrap();
    assert_eq!(trace[0].grad_fro, Some(fro_norm(&g1)));
    assert_eq!(trace[0].grad_nuclear, Some(nuclear_norm(&g1).unwrap()));
}
