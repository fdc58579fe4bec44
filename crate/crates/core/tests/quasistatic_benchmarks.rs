use thermorisk_core::quasistatic::{ideal_gas_curve, integrate_entropy, IdealGasSpec};
use thermorisk_core::tilt::{linear_grid, sweep};
use thermorisk_core::LossSample;

fn grid_sample() -> LossSample {
    // 50 equally likely losses on [0, 1] with a mild right skew
    let losses = (0..50).map(|i| (i as f64 / 49.0).powf(1.3)).collect();
    LossSample::uniform(losses).unwrap()
}

fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    // negative multipliers from −hi to −lo, increasing
    (0..points)
        .map(|i| -(hi.ln() + (lo.ln() - hi.ln()) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

#[test]
fn two_state_budget_reconstructs() {
    let s = LossSample::new(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
    let curve = sweep(&s, &linear_grid(0.0, 3f64.ln(), 10_000).unwrap()).unwrap();
    let rep = integrate_entropy(&curve).unwrap();
    let last = *rep.eta_integrated.last().unwrap();
    assert!((last - (0.75 * 3f64.ln() - 2f64.ln())).abs() < 1e-6);
    assert!(rep.rel_errors.last().unwrap() <= &1e-4);
}

#[test]
fn fifty_point_sample_within_tolerance() {
    let s = grid_sample();
    let curve = sweep(&s, &linear_grid(0.0, 2.0, 10_000).unwrap()).unwrap();
    let rep = integrate_entropy(&curve).unwrap();
    assert!(rep.max_rel_error <= 1e-4, "max rel error {}", rep.max_rel_error);
}

#[test]
fn trapezoid_error_is_second_order() {
    let s = grid_sample();
    let coarse = integrate_entropy(&sweep(&s, &linear_grid(0.0, 2.0, 2_001).unwrap()).unwrap()).unwrap();
    let fine = integrate_entropy(&sweep(&s, &linear_grid(0.0, 2.0, 4_001).unwrap()).unwrap()).unwrap();
    let ratio = coarse.max_abs_error / fine.max_abs_error;
    assert!(ratio >= 3.9, "halving ratio {ratio}");
}

#[test]
fn power_law_budget_slopes() {
    for n in [1u32, 2, 4] {
        let spec = IdealGasSpec { dimension: n, l_max: 1.0, quadrature_points: 4096 };
        let gas = ideal_gas_curve(&spec, &log_grid(30.0, 3000.0, 60)).unwrap();
        assert!(gas.clean.iter().all(|&c| c));
        let (slope, r2) = gas.budget_slope().unwrap();
        let half = n as f64 / 2.0;
        assert!(((slope.abs() - half) / half).abs() < 0.01, "n={n}: slope {slope}");
        assert!(slope < 0.0 && r2 > 0.9999);
        for row in gas.curve.rows() {
            // untruncated mean of the tilted gamma law
            assert!((row.v_star * row.theta.abs() - half).abs() < 1e-6 * half);
        }
    }
}

#[test]
fn truncation_is_flagged_near_zero_tilt() {
    let spec = IdealGasSpec { dimension: 2, l_max: 1.0, quadrature_points: 512 };
    let grid: Vec<f64> = (0..20).map(|i| -20.0 + i as f64).collect();
    let gas = ideal_gas_curve(&spec, &grid).unwrap();
    assert!(gas.clean[0]);
    assert!(!gas.clean[19]);
    assert!(gas.edge_mass.windows(2).all(|w| w[1] >= w[0]));
}
