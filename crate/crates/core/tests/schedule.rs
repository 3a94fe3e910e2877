use proptest::prelude::*;
use shampoo_core::matfun::Mat;
use shampoo_core::schedule::{check_regime, derive, toy_passthrough, ScheduleInput};
use shampoo_core::{Error, ExponentPair};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn input() -> impl Strategy<Value = ScheduleInput> {
    (
        2.0f64..9.0,
        -3.0f64..3.0,
        -3.0f64..3.0,
        prop_oneof![Just(0.0), (-4.0f64..2.0).prop_map(|e| 10f64.powf(e))],
        0.05f64..=1.0,
        0.05f64..=1.0,
        1usize..10,
        1usize..10,
    )
        .prop_map(|(k, l, gap, sigma_sq, gamma, tau, m, n)| ScheduleInput {
            gamma,
            tau,
            ..ScheduleInput::new(
                10f64.powf(k).round() as u64,
                10f64.powf(l),
                10f64.powf(gap),
                sigma_sq,
                m,
                n,
            )
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn derived_settings_are_consistent(inp in input()) {
        let Ok(out) = derive(&inp) else {
            // only too-short horizons are rejected
            let k = inp.steps as f64;
            let sigma_hat_sq = inp.sigma_sq.max(inp.smoothness * inp.gap / (k * inp.gamma * inp.gamma));
            prop_assert!(inp.smoothness * inp.gap / (k * sigma_hat_sq) >= 1.0);
            return Ok(());
        };
        let h = out.hyper;
        let k = inp.steps as f64;
        prop_assert!(out.rate_regime);
        prop_assert!(h.theta <= h.beta && h.beta <= h.theta.sqrt());
        prop_assert!(out.sigma_hat_sq >= inp.sigma_sq);
        // η = √ε̂(1 − θ)/(2L)
        prop_assert!(rel(h.eta, out.eps_hat.sqrt() * (1.0 - h.theta) / (2.0 * inp.smoothness)) < 1e-9);
        // both confinement hypotheses hold with equality at λ_max
        prop_assert!(rel(h.eta * out.lambda_max, out.nu.sqrt() / (2.0 * k.powf(1.25))) < 1e-12);
        prop_assert!(rel(out.lambda_max * out.x1_op_bound, out.nu.sqrt() / k.powf(0.25)) < 1e-12);
        let x1 = Mat::identity(inp.m.min(inp.n)).scale(out.x1_op_bound);
        let report = check_regime(&h, inp.steps, out.nu, &x1);
        prop_assert!(report.get("eta_lambda").unwrap().pass);
        prop_assert!(report.get("x1_op_norm").unwrap().pass);
    }

    #[test]
    fn longer_horizons_shrink_steps(inp in input(), factor in 2u64..100) {
        let longer = ScheduleInput { steps: inp.steps * factor, ..inp };
        if let (Ok(a), Ok(b)) = (derive(&inp), derive(&longer)) {
            prop_assert!(b.hyper.theta >= a.hyper.theta - 1e-15);
            prop_assert!(b.lambda_max < a.lambda_max);
            if inp.sigma_sq > 0.0 {
                prop_assert!(b.hyper.eta < a.hyper.eta);
            }
        }
    }

    #[test]
    fn larger_eps_hat_trades_lambda_for_eta(inp in input(), scale in 1.0f64..100.0) {
        if let Ok(a) = derive(&inp) {
            let b = derive(&ScheduleInput { eps_hat: Some(a.eps_hat * scale), ..inp }).unwrap();
            prop_assert!(b.hyper.eta >= a.hyper.eta);
            prop_assert!(b.lambda_max <= a.lambda_max);
            prop_assert!(b.rate_bound <= a.rate_bound);
        }
    }

    #[test]
    fn lambda_above_max_is_rejected(inp in input(), over in 1.001f64..10.0) {
        if let Ok(a) = derive(&inp) {
            let bad = ScheduleInput { lambda: Some(a.lambda_max * over), ..inp };
            prop_assert!(matches!(derive(&bad), Err(Error::InfeasibleSchedule(_))));
            let ok = derive(&ScheduleInput { lambda: Some(a.lambda_max / over), ..inp }).unwrap();
            prop_assert_eq!(ok.hyper.lambda, a.lambda_max / over);
        }
    }
}

#[test]
fn eps_hat_below_eps_is_rejected() {
    let base = derive(&ScheduleInput::new(1000, 1.0, 1.0, 1.0, 2, 2)).unwrap();
    let low = ScheduleInput {
        eps_hat: Some(base.hyper.eps * 0.5),
        ..ScheduleInput::new(1000, 1.0, 1.0, 1.0, 2, 2)
    };
    assert!(matches!(derive(&low), Err(Error::InfeasibleSchedule(_))));
}

#[test]
fn toy_settings() {
    let h = toy_passthrough(1_000_000, 1e-3, 1e-12, ExponentPair::shampoo()).unwrap();
    assert_eq!(h.eta, 1e-3);
    assert_eq!(h.theta, 0.999);
    assert_eq!(h.beta, 0.999f64.sqrt());
    assert!(toy_passthrough(1, 0.0, 1e-12, ExponentPair::shampoo()).is_err());
}
