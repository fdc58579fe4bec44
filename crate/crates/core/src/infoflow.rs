//! Entropy budgets from information arrival.
//!
//! Entropies are in nats. The chain rule
//! `H(X | Y₁..Yₙ) = H(X) − Σᵢ I(X; Yᵢ | Y₁..Yᵢ₋₁)` splits the total entropy
//! reduction into per-variable contributions; a rate `I(t)` of incoming
//! mutual information accumulates into the budget `η(T) = ∫₀ᵀ I(t) dt`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent methods shadow it when std is linked
use num_traits::Float;

use crate::ensemble::{LossSample, NORMALIZATION_TOL};
use crate::error::{Error, Result};
use crate::math::xlogx;
use crate::step::StepFunction;
use crate::tilt::{solve_theta_for_budget, tilt_at};

pub const MAX_CONDITIONING: usize = 8;
pub const MAX_CELLS: usize = 1 << 24;

/// Joint pmf of `(X, Y₁, …, Yₙ)` on a finite product alphabet.
///
/// Cells are row-major with `X` as the slowest axis and `Yₙ` the fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    dims: Vec<usize>,
    probs: Vec<f64>,
}

impl JointPmf {
    /// `dims[0]` is the alphabet size of `X`, then one entry per `Yᵢ`.
    pub fn new(dims: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        if dims.len() < 2 || dims.len() > MAX_CONDITIONING + 1 {
            return Err(Error::Config(format!("need between 1 and {MAX_CONDITIONING} conditioning variables")));
        }
        if dims.contains(&0) {
            return Err(Error::Config("alphabet sizes must be positive".into()));
        }
        let cells = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d).filter(|&c| c <= MAX_CELLS));
        let cells = cells.ok_or_else(|| Error::Config(format!("joint alphabet exceeds {MAX_CELLS} cells")))?;
        if probs.len() != cells {
            return Err(Error::Dimension { expected: cells, found: probs.len() });
        }
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::Domain("probabilities must be finite and nonnegative".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Domain(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self { dims, probs })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Number of conditioning variables `n`.
    pub fn conditioning_count(&self) -> usize {
        self.dims.len() - 1
    }

    /// Reorders the conditioning variables: new `Y_{i+1}` is old `Y_{perm[i]+1}`.
    pub fn permute_y(&self, perm: &[usize]) -> Result<Self> {
        let n = self.conditioning_count();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || core::mem::replace(&mut seen[p], true)) {
            return Err(Error::Config("not a permutation of the conditioning variables".into()));
        }
        let axes: Vec<usize> = core::iter::once(0).chain(perm.iter().map(|p| p + 1)).collect();
        let dims: Vec<usize> = axes.iter().map(|&a| self.dims[a]).collect();
        let old_strides = strides(&self.dims);
        let mut probs = vec![0.0; self.probs.len()];
        let mut index = vec![0usize; dims.len()];
        for slot in probs.iter_mut() {
            let src: usize = index.iter().zip(&axes).map(|(&v, &a)| v * old_strides[a]).sum();
            *slot = self.probs[src];
            advance(&mut index, &dims);
        }
        Ok(Self { dims, probs })
    }

    /// Shannon entropy of the marginal on `axes`.
    fn marginal_entropy(&self, axes: &[usize]) -> f64 {
        if axes.is_empty() {
            return 0.0;
        }
        let size: usize = axes.iter().map(|&a| self.dims[a]).product();
        if size == self.probs.len() {
            return -self.probs.iter().map(|&p| xlogx(p)).sum::<f64>();
        }
        let marginal = self.marginal(axes, size);
        -marginal.iter().map(|&p| xlogx(p)).sum::<f64>()
    }

    fn marginal(&self, axes: &[usize], size: usize) -> Vec<f64> {
        let mut sub_strides = vec![0usize; self.dims.len()];
        let mut stride = 1;
        for &a in axes.iter().rev() {
            sub_strides[a] = stride;
            stride *= self.dims[a];
        }
        let mut out = vec![0.0; size];
        let mut index = vec![0usize; self.dims.len()];
        for &p in &self.probs {
            let target: usize = index.iter().zip(&sub_strides).map(|(v, s)| v * s).sum();
            out[target] += p;
            advance(&mut index, &self.dims);
        }
        out
    }
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for i in (0..dims.len() - 1).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// Row-major odometer increment.
fn advance(index: &mut [usize], dims: &[usize]) {
    for a in (0..dims.len()).rev() {
        index[a] += 1;
        if index[a] < dims[a] {
            return;
        }
        index[a] = 0;
    }
}

/// Chain-rule decomposition of `H(X | Y₁..Yₙ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyChain {
    pub h_x: f64,
    pub h_x_given_all: f64,
    /// `terms[i] = I(X; Y_{i+1} | Y₁..Yᵢ)`.
    pub terms: Vec<f64>,
}

/// Per-variable conditional mutual informations, each from four marginal
/// entropies. Rounding negatives are clamped to zero.
pub fn conditional_entropy_chain(joint: &JointPmf) -> EntropyChain {
    let n = joint.conditioning_count();
    let h_x = joint.marginal_entropy(&[0]);
    let mut terms = Vec::with_capacity(n);
    let mut axes_y: Vec<usize> = Vec::with_capacity(n);
    let mut axes_xy: Vec<usize> = vec![0];
    let (mut h_y_prev, mut h_xy_prev) = (0.0, h_x);
    for i in 1..=n {
        axes_y.push(i);
        axes_xy.push(i);
        let h_y = joint.marginal_entropy(&axes_y);
        let h_xy = joint.marginal_entropy(&axes_xy);
        terms.push((h_xy_prev + h_y - h_y_prev - h_xy).max(0.0));
        h_y_prev = h_y;
        h_xy_prev = h_xy;
    }
    let h_x_given_all = h_x - terms.iter().sum::<f64>();
    EntropyChain { h_x, h_x_given_all, terms }
}

/// `H(X | Y₁..Yₙ) = −Σ p(x, y) ln(p(x, y) / p(y))`, straight from the joint.
pub fn conditional_entropy_direct(joint: &JointPmf) -> f64 {
    let ys = joint.probs.len() / joint.dims[0];
    let mut p_y = vec![0.0; ys];
    for (c, &p) in joint.probs.iter().enumerate() {
        p_y[c % ys] += p;
    }
    let mut h = 0.0;
    for (c, &p) in joint.probs.iter().enumerate() {
        if p > 0.0 {
            h -= p * (p / p_y[c % ys]).ln();
        }
    }
    h.max(0.0)
}

/// Piecewise-constant information rate `I(t) ≥ 0` on `[0, T_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoSchedule {
    rates: StepFunction,
}

impl InfoSchedule {
    pub fn new(knots: Vec<f64>, rates: Vec<f64>) -> Result<Self> {
        let rates = StepFunction::new(knots, rates)?;
        if rates.start() != 0.0 {
            return Err(Error::Config("information schedule must start at 0".into()));
        }
        if rates.values().iter().any(|&r| r < 0.0) {
            return Err(Error::Domain("information rates must be nonnegative".into()));
        }
        Ok(Self { rates })
    }

    pub fn constant(rate: f64, t_max: f64) -> Result<Self> {
        Self::new(vec![0.0, t_max], vec![rate])
    }

    pub fn rates(&self) -> &StepFunction {
        &self.rates
    }

    pub fn t_max(&self) -> f64 {
        self.rates.end()
    }
}

/// `η(T) = ∫₀ᵀ I(t) dt`, exact for the piecewise-constant rate.
pub fn entropy_budget(schedule: &InfoSchedule, horizon: f64) -> Result<f64> {
    if !(horizon >= 0.0) {
        return Err(Error::Domain(format!("horizon {horizon} must be nonnegative")));
    }
    if horizon > schedule.t_max() {
        return Err(Error::Range(format!("horizon {horizon} exceeds schedule end {}", schedule.t_max())));
    }
    Ok(schedule.rates.integral_to(horizon).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HorizonRow {
    pub horizon: f64,
    pub eta: f64,
    pub theta: f64,
    pub v_star: f64,
}

/// Worst-case risk as a function of horizon: budget from the schedule, then
/// the multiplier spending that budget, then the tilted expectation.
pub fn risk_horizon_curve(sample: &LossSample, schedule: &InfoSchedule, horizons: &[f64]) -> Result<Vec<HorizonRow>> {
    horizons
        .iter()
        .enumerate()
        .map(|(i, &horizon)| {
            let row = || -> Result<HorizonRow> {
                let eta = entropy_budget(schedule, horizon)?;
                let theta = solve_theta_for_budget(sample, eta)?;
                let v_star = tilt_at(sample, theta)?.v_star;
                Ok(HorizonRow { horizon, eta, theta, v_star })
            };
            row().map_err(Error::at(i))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::LN_2;

    fn two_bit() -> JointPmf {
        // X uniform on {0..3}, Y = high bit of X
        JointPmf::new(vec![4, 2], vec![0.25, 0.0, 0.25, 0.0, 0.0, 0.25, 0.0, 0.25]).unwrap()
    }

    #[test]
    fn high_bit_reveals_one_bit() {
        let c = conditional_entropy_chain(&two_bit());
        assert!((c.h_x - 4f64.ln()).abs() < 1e-15);
        assert_eq!(c.terms.len(), 1);
        assert!((c.terms[0] - LN_2).abs() < 1e-15);
        assert!((c.h_x_given_all - LN_2).abs() < 1e-15);
        assert!((conditional_entropy_direct(&two_bit()) - LN_2).abs() < 1e-15);
    }

    #[test]
    fn independent_ys_carry_nothing() {
        let px = [0.2, 0.3, 0.5];
        let py = [0.6, 0.4];
        let mut probs = Vec::new();
        for a in px {
            for b in py {
                for c in py {
                    probs.push(a * b * c);
                }
            }
        }
        let j = JointPmf::new(vec![3, 2, 2], probs).unwrap();
        let c = conditional_entropy_chain(&j);
        assert!(c.terms.iter().all(|&t| t.abs() < 1e-15));
        assert!((c.h_x_given_all - c.h_x).abs() < 1e-15);
    }

    #[test]
    fn full_revelation() {
        let probs = vec![0.1, 0.0, 0.0, 0.0, 0.3, 0.0, 0.0, 0.0, 0.6];
        let j = JointPmf::new(vec![3, 3], probs).unwrap();
        let c = conditional_entropy_chain(&j);
        assert!((c.terms[0] - c.h_x).abs() < 1e-15);
        assert!(c.h_x_given_all.abs() < 1e-15);
    }

    #[test]
    fn permutation_moves_cells() {
        // X binary, Y1 binary, Y2 ternary; distinct masses per cell
        let raw: Vec<f64> = (1..=12).map(f64::from).collect();
        let total: f64 = raw.iter().sum();
        let j = JointPmf::new(vec![2, 2, 3], raw.iter().map(|v| v / total).collect()).unwrap();
        let p = j.permute_y(&[1, 0]).unwrap();
        assert_eq!(p.dims(), &[2, 3, 2]);
        // old (x=1, y1=0, y2=2) sits at new (x=1, y1=2, y2=0)
        assert_eq!(p.probs()[6 + 2 * 2], j.probs()[6 + 2]);
        assert_eq!(p.permute_y(&[1, 0]).unwrap(), j);
        assert!(j.permute_y(&[0, 0]).is_err());
    }

    #[test]
    fn rejects_bad_pmfs() {
        assert!(matches!(JointPmf::new(vec![2, 2], vec![0.5, 0.5, 0.1, 0.0]), Err(Error::Domain(_))));
        assert!(matches!(JointPmf::new(vec![2, 2], vec![0.5, 0.5]), Err(Error::Dimension { .. })));
        assert!(JointPmf::new(vec![2], vec![0.5, 0.5]).is_err());
        assert!(JointPmf::new(vec![2; 10], vec![0.0; 1 << 10]).is_err());
        assert!(JointPmf::new(vec![1 << 13, 1 << 12], Vec::new()).is_err());
    }

    #[test]
    fn budget_examples() {
        let s = InfoSchedule::new(vec![0.0, 1.0, 2.0], vec![0.1, 0.3]).unwrap();
        assert!((entropy_budget(&s, 1.5).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(entropy_budget(&s, 0.0).unwrap(), 0.0);
        assert!(matches!(entropy_budget(&s, 2.5), Err(Error::Range(_))));
        let flat = InfoSchedule::constant(0.0, 3.0).unwrap();
        assert_eq!(entropy_budget(&flat, 3.0).unwrap(), 0.0);
        let c = InfoSchedule::constant(0.7, 3.0).unwrap();
        assert!((entropy_budget(&c, 2.0).unwrap() - 1.4).abs() < 1e-15);
        assert!(InfoSchedule::new(vec![0.0, 1.0], vec![-0.1]).is_err());
    }

    #[test]
    fn horizon_curve_composes() {
        let sample = LossSample::new(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
        // η at θ = ln 3 on the fair coin: θ·V* − ln E[e^{θℓ}] = 0.75 ln 3 − ln 2
        let eta1 = 0.75 * 3f64.ln() - 2f64.ln();
        let sched = InfoSchedule::constant(eta1, 2.0).unwrap();
        let rows = risk_horizon_curve(&sample, &sched, &[0.0, 1.0]).unwrap();
        assert_eq!(rows[0].theta, 0.0);
        assert_eq!(rows[0].v_star, 0.5);
        assert!((rows[1].theta - 3f64.ln()).abs() < 1e-9);
        assert!((rows[1].v_star - 0.75).abs() < 1e-9);
        let err = risk_horizon_curve(&sample, &InfoSchedule::constant(1.0, 2.0).unwrap(), &[0.1, 1.0]).unwrap_err();
        assert!(matches!(err, Error::AtIndex { index: 1, .. }));
    }
}
