use proptest::prelude::*;
use thermorisk_core::ensemble::{expected_loss, relative_entropy, to_ensemble, to_sample};
use thermorisk_core::tilt::{solve_theta_for_budget, solve_theta_for_risk, sweep, tilt_at};
use thermorisk_core::{LossSample, MeasureChange};

fn sample_strategy() -> impl Strategy<Value = LossSample> {
    prop::collection::vec((-5.0f64..5.0, 0.01f64..1.0), 2..40).prop_map(|pts| {
        let (losses, weights) = pts.into_iter().unzip();
        LossSample::from_weights(losses, weights).unwrap()
    })
}

fn variance_under(s: &LossSample, m: &MeasureChange) -> f64 {
    let mean = expected_loss(s, Some(m)).unwrap();
    s.iter().zip(m.values()).map(|((l, p), w)| p * w * (l - mean).powi(2)).sum()
}

fn skewed() -> LossSample {
    LossSample::from_weights(vec![-1.0, 0.2, 0.5, 1.5, 3.0], vec![0.3, 0.25, 0.2, 0.15, 0.1]).unwrap()
}

#[test]
fn risk_slope_is_tilted_variance() {
    let s = skewed();
    let h = 1e-5;
    for theta in [0.2, 0.7, 1.3, 2.5] {
        let fd = (tilt_at(&s, theta + h).unwrap().v_star - tilt_at(&s, theta - h).unwrap().v_star) / (2.0 * h);
        let var = variance_under(&s, &tilt_at(&s, theta).unwrap().m_star);
        assert!(((fd - var) / var).abs() < 1e-5, "θ={theta}: {fd} vs {var}");
    }
}

#[test]
fn certainty_equivalent_slope_is_budget_over_theta_squared() {
    let s = skewed();
    let h = 1e-5;
    for theta in [0.2, 0.7, 1.3, 2.5] {
        let fd = (tilt_at(&s, theta + h).unwrap().w_star - tilt_at(&s, theta - h).unwrap().w_star) / (2.0 * h);
        let t = tilt_at(&s, theta).unwrap();
        let want = t.eta_star / (theta * theta);
        assert!(((fd - want) / want).abs() < 1e-5, "θ={theta}: {fd} vs {want}");
    }
}

#[test]
fn budget_at_the_worst_case_is_relative_entropy_of_m_star() {
    let s = skewed();
    for theta in [0.05, 1.0, 4.0] {
        let t = tilt_at(&s, theta).unwrap();
        let direct = relative_entropy(&t.m_star, &s).unwrap();
        assert!((direct - t.eta_star).abs() < 1e-12);
        assert!((t.eta_from_bookkeeping() - t.eta_star).abs() < 1e-12 * t.v_star.abs().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn bookkeeping_holds(s in sample_strategy(), theta in 0.01f64..3.0) {
        let t = tilt_at(&s, theta).unwrap();
        prop_assert!((t.w_star - (t.v_star - t.eta_star / theta)).abs() <= 1e-10 * t.v_star.abs().max(1.0));
        prop_assert!(t.eta_star >= -1e-14);
        prop_assert!(t.v_star >= s.mean() - 1e-12);
        prop_assert!(t.v_star <= s.max_loss() + 1e-12);
    }

    #[test]
    fn gibbs_inequality(s in sample_strategy(), theta in 0.05f64..3.0, raw in prop::collection::vec(0.0f64..2.0, 40)) {
        let t = tilt_at(&s, theta).unwrap();
        let mut raw: Vec<f64> = raw.into_iter().take(s.len()).collect();
        raw[0] += 0.1;
        let q = MeasureChange::normalized(raw, &s).unwrap();
        let objective = expected_loss(&s, Some(&q)).unwrap() - relative_entropy(&q, &s).unwrap() / theta;
        prop_assert!(objective <= t.w_star + 1e-10);
        let at_opt = t.v_star - relative_entropy(&t.m_star, &s).unwrap() / theta;
        prop_assert!((at_opt - t.w_star).abs() <= 1e-12 * t.w_star.abs().max(1.0));
    }

    #[test]
    fn budget_feasible_measures_do_not_beat_the_tilt(
        s in sample_strategy(),
        theta in 0.05f64..3.0,
        raw in prop::collection::vec(0.0f64..2.0, 40),
        mix in 0.0f64..1.0,
    ) {
        let t = tilt_at(&s, theta).unwrap();
        let raw: Vec<f64> = raw.into_iter().take(s.len()).collect();
        // pull the candidate toward the identity until it fits the budget
        let mut lambda = mix;
        for _ in 0..60 {
            let q: Vec<f64> = raw.iter().map(|r| 1.0 - lambda + lambda * r).collect();
            let Ok(q) = MeasureChange::normalized(q, &s) else { break };
            if relative_entropy(&q, &s).unwrap() <= t.eta_star {
                prop_assert!(expected_loss(&s, Some(&q)).unwrap() <= t.v_star + 1e-9);
                break;
            }
            lambda *= 0.5;
        }
    }

    #[test]
    fn expectation_is_linear_in_losses(s in sample_strategy(), a in -3.0f64..3.0, b in -3.0f64..3.0, theta in 0.0f64..2.0) {
        let m = tilt_at(&s, theta).unwrap().m_star;
        let shifted = LossSample::new(s.losses().iter().map(|l| a * l + b).collect(), s.probs().to_vec()).unwrap();
        let lhs = expected_loss(&shifted, Some(&m)).unwrap();
        let rhs = a * expected_loss(&s, Some(&m)).unwrap() + b;
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs() + 5.0 * a.abs()));
    }

    #[test]
    fn ensemble_round_trip_preserves_law_and_measure(s in sample_strategy(), theta in 0.0f64..2.0) {
        let m = tilt_at(&s, theta).unwrap().m_star;
        let e = to_ensemble(&s, Some(&m)).unwrap();
        let back = to_sample(&e).unwrap();
        // oracle: merge equal losses by hand, nominal mass and mass-weighted m
        let mut merged: Vec<(f64, f64, f64)> = s.iter().zip(m.values()).map(|((l, p), w)| (l, p, p * w)).collect();
        merged.sort_by(|a, b| b.0.total_cmp(&a.0));
        merged.dedup_by(|later, kept| {
            let same = later.0 == kept.0;
            if same {
                kept.1 += later.1;
                kept.2 += later.2;
            }
            same
        });
        prop_assert_eq!(back.len(), merged.len());
        let occupations = e.measure_change();
        for (((l, p), &f), (ml, mp, mq)) in back.iter().zip(occupations.values()).zip(merged) {
            prop_assert_eq!(l, ml);
            prop_assert!((p - mp).abs() <= 1e-12);
            prop_assert!((f - mq / mp).abs() <= 1e-12 * f.max(1.0));
        }
    }

    #[test]
    fn worst_case_curve_is_monotone(s in sample_strategy()) {
        let grid: Vec<f64> = (0..30).map(|i| i as f64 * 0.1).collect();
        let curve = sweep(&s, &grid).unwrap();
        for w in curve.rows().windows(2) {
            prop_assert!(w[1].v_star >= w[0].v_star - 1e-12);
            prop_assert!(w[1].eta_star >= w[0].eta_star - 1e-12);
        }
    }

    #[test]
    fn inverses_recover_theta(s in sample_strategy(), theta in 0.05f64..2.0) {
        prop_assume!(s.spread() > 1e-3);
        let t = tilt_at(&s, theta).unwrap();
        prop_assume!(t.v_star < s.max_loss() - 1e-6 * s.spread());
        let from_risk = solve_theta_for_risk(&s, t.v_star).unwrap();
        prop_assert!((tilt_at(&s, from_risk).unwrap().v_star - t.v_star).abs() <= 1e-9 * s.spread());
        prop_assume!(t.eta_star > 1e-10);
        let from_budget = solve_theta_for_budget(&s, t.eta_star).unwrap();
        prop_assert!((tilt_at(&s, from_budget).unwrap().eta_star - t.eta_star).abs() <= 1e-9 * t.eta_star.max(1e-3));
    }
}
