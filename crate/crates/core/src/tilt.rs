//! Worst-case characterization at a fixed Lagrange multiplier.
//!
//! At multiplier `θ` the worst-case measure is the exponential tilt
//! `m* = e^{θℓ} / E[e^{θℓ}]`, the canonical ensemble at `β = θ`. From it:
//!
//! - worst-case risk `V* = E[ℓ e^{θℓ}] / E[e^{θℓ}]` (internal energy, sign flipped),
//! - penalized risk `W* = θ⁻¹ ln E[e^{θℓ}]` (free energy, sign flipped),
//! - budget `η* = θ V* − ln E[e^{θℓ}]` (entropy reduction).
//!
//! All exponentials go through a log-sum-exp shift. `θ = 0` is handled
//! analytically since `W*` is `0/0` there.

use alloc::vec::Vec;

#[allow(unused_imports)] // inherent methods shadow it when std is linked
use num_traits::Float;

use crate::ensemble::{LossSample, MeasureChange};
use crate::error::{Error, Result};
use crate::math::shifted_exp_sum;
use crate::root::{expand_bracket, solve_increasing};

/// Worst case at one value of `θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct TiltResult {
    pub theta: f64,
    pub m_star: MeasureChange,
    pub v_star: f64,
    pub w_star: f64,
    pub eta_star: f64,
    /// `ln E[e^{θℓ}]`, equal to `θ W*`.
    pub log_partition: f64,
}

impl TiltResult {
    /// `η*` recomputed from the free-energy bookkeeping `θ (V* − W*)`.
    pub fn eta_from_bookkeeping(&self) -> f64 {
        self.theta * (self.v_star - self.w_star)
    }

    pub fn row(&self) -> TiltRow {
        TiltRow { theta: self.theta, v_star: self.v_star, w_star: self.w_star, eta_star: self.eta_star }
    }
}

/// `(ln E[e^{θℓ}], V*)` without materializing `m*`.
fn log_partition_and_risk(sample: &LossSample, theta: f64) -> Result<(f64, f64)> {
    if theta == 0.0 {
        return Ok((0.0, sample.mean()));
    }
    let (shift, sum) = shifted_exp_sum(sample.iter().map(|(l, p)| (p, theta * l)))
        .ok_or_else(|| Error::Precondition("sample has no mass".into()))?;
    let weighted: f64 = sample
        .iter()
        .filter(|&(_, p)| p > 0.0)
        .map(|(l, p)| p * (theta * l - shift).exp() * l)
        .sum();
    let log_z = shift + sum.ln();
    let v = weighted / sum;
    if !(log_z.is_finite() && v.is_finite()) {
        return Err(Error::Overflow { theta });
    }
    Ok((log_z, v))
}

/// Worst-case measure and its risk figures at multiplier `θ`.
pub fn tilt_at(sample: &LossSample, theta: f64) -> Result<TiltResult> {
    if !theta.is_finite() {
        return Err(Error::Overflow { theta });
    }
    if theta == 0.0 {
        let mean = sample.mean();
        return Ok(TiltResult {
            theta,
            m_star: MeasureChange::identity(sample.len()),
            v_star: mean,
            w_star: mean,
            eta_star: 0.0,
            log_partition: 0.0,
        });
    }
    let (log_z, v_star) = log_partition_and_risk(sample, theta)?;
    let m: Vec<f64> = sample.losses().iter().map(|&l| (theta * l - log_z).exp()).collect();
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::Overflow { theta });
    }
    let eta_star = (theta * v_star - log_z).max(0.0);
    Ok(TiltResult {
        theta,
        m_star: MeasureChange::new(m)?,
        v_star,
        w_star: log_z / theta,
        eta_star,
        log_partition: log_z,
    })
}

/// One row of a [`TiltCurve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltRow {
    pub theta: f64,
    pub v_star: f64,
    pub w_star: f64,
    pub eta_star: f64,
}

/// Worst-case figures over a strictly increasing `θ` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TiltCurve {
    rows: Vec<TiltRow>,
}

impl TiltCurve {
    pub fn new(rows: Vec<TiltRow>) -> Result<Self> {
        check_grid(rows.iter().map(|r| r.theta))?;
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[TiltRow] {
        &self.rows
    }

    pub fn thetas(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(|r| r.theta)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

pub(crate) fn check_grid<I: Iterator<Item = f64>>(grid: I) -> Result<()> {
    let mut prev = f64::NEG_INFINITY;
    let mut count = 0usize;
    for (i, t) in grid.enumerate() {
        if !t.is_finite() {
            return Err(Error::Config(alloc::format!("grid point {i} is not finite")));
        }
        if t <= prev {
            return Err(Error::Config(alloc::format!("grid is not strictly increasing at index {i}")));
        }
        prev = t;
        count += 1;
    }
    if count == 0 {
        return Err(Error::Config("grid is empty".into()));
    }
    Ok(())
}

/// [`tilt_at`] over every grid point.
pub fn sweep(sample: &LossSample, theta_grid: &[f64]) -> Result<TiltCurve> {
    check_grid(theta_grid.iter().copied())?;
    let rows = theta_grid
        .iter()
        .enumerate()
        .map(|(i, &theta)| {
            log_partition_and_risk(sample, theta).map_err(Error::at(i)).map(|(log_z, v)| {
                if theta == 0.0 {
                    TiltRow { theta, v_star: v, w_star: v, eta_star: 0.0 }
                } else {
                    TiltRow { theta, v_star: v, w_star: log_z / theta, eta_star: (theta * v - log_z).max(0.0) }
                }
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TiltCurve { rows })
}

/// Evenly spaced grid of `points` values on `[start, end]`.
pub fn linear_grid(start: f64, end: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 || !(end > start) {
        return Err(Error::Config("grid needs at least two points and end > start".into()));
    }
    let h = (end - start) / (points - 1) as f64;
    let mut g: Vec<f64> = (0..points).map(|i| start + h * i as f64).collect();
    g[points - 1] = end;
    Ok(g)
}

/// The multiplier whose worst-case risk equals `v_target`.
///
/// `V*(θ)` increases strictly from `min ℓ` to `max ℓ`, so any target strictly
/// inside the support has a unique root. Targets below the nominal mean give
/// a negative (best-case) multiplier.
pub fn solve_theta_for_risk(sample: &LossSample, v_target: f64) -> Result<f64> {
    let (lo, hi) = (sample.min_loss(), sample.max_loss());
    if !(v_target > lo && v_target < hi) {
        return Err(Error::Range(alloc::format!(
            "target risk {v_target} is outside the achievable interval ({lo}, {hi})"
        )));
    }
    let mean = sample.mean();
    if v_target == mean {
        return Ok(0.0);
    }
    let spread = hi - lo;
    let tol = 1e-10 * spread;
    let f = |theta: f64| log_partition_and_risk(sample, theta).map(|(_, v)| v - v_target);
    if v_target > mean {
        let upper = expand_bracket(f, 0.0, 1.0 / spread, 1.0)?;
        solve_increasing(f, 0.0, upper, tol)
    } else {
        let lower = expand_bracket(f, 0.0, 1.0 / spread, -1.0)?;
        solve_increasing(f, lower, 0.0, tol)
    }
}

/// Supremum of attainable budgets: `−ln P(ℓ = max ℓ)`.
pub fn budget_supremum(sample: &LossSample) -> f64 {
    -sample.max_loss_mass().ln()
}

/// The nonnegative multiplier whose worst case spends exactly `eta_target`.
pub fn solve_theta_for_budget(sample: &LossSample, eta_target: f64) -> Result<f64> {
    if !(eta_target >= 0.0) || !eta_target.is_finite() {
        return Err(Error::Range(alloc::format!("budget {eta_target} must be a nonnegative number")));
    }
    if eta_target == 0.0 {
        return Ok(0.0);
    }
    let sup = budget_supremum(sample);
    if eta_target >= sup {
        return Err(Error::Range(alloc::format!(
            "budget {eta_target} is not below the supremum {sup}"
        )));
    }
    let f = |theta: f64| {
        log_partition_and_risk(sample, theta).map(|(log_z, v)| (theta * v - log_z) - eta_target)
    };
    let upper = expand_bracket(f, 0.0, 1.0 / sample.spread(), 1.0)?;
    solve_increasing(f, 0.0, upper, 1e-11 * eta_target.min(1.0))
}
