//! Small numerical kernels used across modules.

use alloc::vec::Vec;

#[allow(unused_imports)] // inherent methods shadow it when std is linked
use num_traits::Float;

/// `ln Σ w_i e^{a_i}` for nonnegative weights, shifted by the largest exponent
/// among points with positive weight. Returns `(shift, Σ w_i e^{a_i − shift})`
/// so callers can reuse the shifted sum; the log-sum is `shift + ln(sum)`.
///
/// Returns `None` when no weight is positive.
pub fn shifted_exp_sum<I>(terms: I) -> Option<(f64, f64)>
where
    I: Iterator<Item = (f64, f64)> + Clone,
{
    let shift = terms
        .clone()
        .filter(|&(w, _)| w > 0.0)
        .map(|(_, a)| a)
        .fold(f64::NEG_INFINITY, f64::max);
    if shift == f64::NEG_INFINITY {
        return None;
    }
    let sum = terms
        .filter(|&(w, _)| w > 0.0)
        .map(|(w, a)| w * (a - shift).exp())
        .sum();
    Some((shift, sum))
}

/// `ln Σ w_i e^{a_i}`; `-inf` when every weight is zero.
pub fn log_sum_exp<I>(terms: I) -> f64
where
    I: Iterator<Item = (f64, f64)> + Clone,
{
    match shifted_exp_sum(terms) {
        Some((shift, sum)) => shift + sum.ln(),
        None => f64::NEG_INFINITY,
    }
}

/// `x ln x` with the continuous extension `0 ln 0 = 0`.
#[inline]
pub fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Weighted least squares fit of `y = a + b x`. Returns `(a, b, r²)`, with r²
/// the weighted coefficient of determination.
pub fn weighted_linear_fit(points: &[(f64, f64, f64)]) -> Option<(f64, f64, f64)> {
    let sw: f64 = points.iter().map(|p| p.2).sum();
    if points.len() < 2 || !(sw > 0.0) {
        return None;
    }
    let mx = points.iter().map(|&(x, _, w)| w * x).sum::<f64>() / sw;
    let my = points.iter().map(|&(_, y, w)| w * y).sum::<f64>() / sw;
    let sxx: f64 = points.iter().map(|&(x, _, w)| w * (x - mx) * (x - mx)).sum();
    let sxy: f64 = points.iter().map(|&(x, y, w)| w * (x - mx) * (y - my)).sum();
    let syy: f64 = points.iter().map(|&(_, y, w)| w * (y - my) * (y - my)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 {
        let ss_res: f64 = points
            .iter()
            .map(|&(x, y, w)| {
                let r = y - intercept - slope * x;
                w * r * r
            })
            .sum();
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Some((intercept, slope, r2))
}

/// Gauss–Legendre nodes and weights of the given order on `[-1, 1]`, by
/// Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let mut nodes = alloc::vec![0.0; n];
    let mut weights = alloc::vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss–Legendre rule on `[a, b]` with `panels` equal panels.
#[derive(Debug, Clone)]
pub struct CompositeRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl CompositeRule {
    pub fn new(a: f64, b: f64, panels: usize, order: usize) -> Self {
        let (x, w) = gauss_legendre(order);
        let h = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let mid = a + h * (p as f64 + 0.5);
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(mid + 0.5 * h * xi);
                weights.push(0.5 * h * wi);
            }
        }
        Self { nodes, weights }
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}
