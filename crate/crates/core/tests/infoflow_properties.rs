use proptest::prelude::*;
use thermorisk_core::infoflow::{
    conditional_entropy_chain, conditional_entropy_direct, entropy_budget, risk_horizon_curve, InfoSchedule, JointPmf,
};
use thermorisk_core::tilt::budget_supremum;
use thermorisk_core::LossSample;

fn joint_strategy() -> impl Strategy<Value = JointPmf> {
    prop::collection::vec(1usize..4, 2..5)
        .prop_flat_map(|mut dims| {
            dims[0] += 1;
            let cells: usize = dims.iter().product();
            (Just(dims), prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..1.0], cells))
        })
        .prop_filter_map("empty pmf", |(dims, raw)| {
            let total: f64 = raw.iter().sum();
            (total > 0.0).then(|| JointPmf::new(dims, raw.iter().map(|w| w / total).collect()).unwrap())
        })
}

fn permutation(n: usize, mut key: u64) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = (key % (i as u64 + 1)) as usize;
        key /= i as u64 + 1;
        perm.swap(i, j);
    }
    perm
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn chain_terms_are_consistent(j in joint_strategy()) {
        let c = conditional_entropy_chain(&j);
        prop_assert_eq!(c.terms.len(), j.conditioning_count());
        prop_assert!(c.terms.iter().all(|&t| t >= 0.0));
        prop_assert!(c.h_x_given_all <= c.h_x + 1e-15);
        prop_assert!((c.h_x_given_all - conditional_entropy_direct(&j)).abs() <= 1e-12);
    }

    #[test]
    fn total_is_order_invariant(j in joint_strategy(), key in any::<u64>()) {
        let perm = permutation(j.conditioning_count(), key);
        let a = conditional_entropy_chain(&j);
        let b = conditional_entropy_chain(&j.permute_y(&perm).unwrap());
        prop_assert!((a.h_x - b.h_x).abs() <= 1e-15);
        prop_assert!((a.h_x_given_all - b.h_x_given_all).abs() <= 1e-12);
    }

    #[test]
    fn budget_is_nondecreasing(rates in prop::collection::vec(0.0f64..1.0, 1..6), t in 0.0f64..1.0, dt in 0.0f64..1.0) {
        let knots: Vec<f64> = (0..=rates.len()).map(|i| i as f64).collect();
        let t_max = rates.len() as f64;
        let s = InfoSchedule::new(knots, rates).unwrap();
        let (a, b) = (t * t_max, (t + dt).min(1.0) * t_max);
        prop_assert!(entropy_budget(&s, b).unwrap() >= entropy_budget(&s, a).unwrap());
    }
}

#[test]
fn horizon_curve_is_monotone() {
    let s = LossSample::from_weights(vec![-0.5, 0.0, 0.4, 1.0, 2.2], vec![0.2, 0.3, 0.25, 0.15, 0.1]).unwrap();
    let sched = InfoSchedule::new(vec![0.0, 1.0, 2.5, 4.0], vec![0.05, 0.3, 0.1]).unwrap();
    assert!(entropy_budget(&sched, 4.0).unwrap() < budget_supremum(&s));
    let horizons: Vec<f64> = (0..20).map(|i| 4.0 * i as f64 / 19.0).collect();
    let rows = risk_horizon_curve(&s, &sched, &horizons).unwrap();
    assert_eq!(rows[0].v_star, s.mean());
    for w in rows.windows(2) {
        assert!(w[1].eta >= w[0].eta && w[1].theta >= w[0].theta && w[1].v_star >= w[0].v_star);
    }
}
