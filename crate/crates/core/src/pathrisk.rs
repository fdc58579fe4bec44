//! Worst-case risk of path functionals `ℓ = ∫₀^T h(t) dx_t + g(x_T)`.
//!
//! Under a driftless nominal model `dx = σ dW` the worst case at multiplier
//! `θ` adds the drift `θσ²h(t)`, and the worst-case risk `V(t, x)` solves
//!
//! ```text
//! ∂V/∂t + θσ²h (∂V/∂x + h) + (σ²/2) ∂²V/∂x² = 0,   V(T, x) = g(x).
//! ```
//!
//! [`solve`] marches this backward with Crank–Nicolson (central convection)
//! and `∂²V/∂x² = 0` at both edges. [`mc_oracle`] estimates the same value by
//! simulating the drifted paths directly.

use alloc::vec::Vec;

#[allow(unused_imports)] // inherent methods shadow it when std is linked
use num_traits::Float;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};
use crate::math::CompositeRule;
use crate::step::StepFunction;

/// Grid Péclet number above which central convection may oscillate.
pub const PECLET_LIMIT: f64 = 2.0;

/// Terminal payoff `g`.
#[derive(Debug, Clone, PartialEq)]
pub enum Payoff {
    Zero,
    Linear { slope: f64, intercept: f64 },
    Gaussian { amplitude: f64, center: f64, width: f64 },
    Call { strike: f64 },
    Put { strike: f64 },
    /// Piecewise-linear through `(xs, values)`, extended linearly past the ends.
    Table { xs: Vec<f64>, values: Vec<f64> },
}

impl Payoff {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Payoff::Zero => 0.0,
            Payoff::Linear { slope, intercept } => slope * x + intercept,
            Payoff::Gaussian { amplitude, center, width } => {
                let z = (x - center) / width;
                amplitude * (-0.5 * z * z).exp()
            }
            Payoff::Call { strike } => (x - strike).max(0.0),
            Payoff::Put { strike } => (strike - x).max(0.0),
            Payoff::Table { xs, values } => {
                let n = xs.len();
                let i = xs[1..n - 1].partition_point(|&k| k <= x);
                let w = (x - xs[i]) / (xs[i + 1] - xs[i]);
                values[i] + w * (values[i + 1] - values[i])
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match self {
            Payoff::Zero => Ok(()),
            Payoff::Linear { slope, intercept } if finite(&[*slope, *intercept]) => Ok(()),
            Payoff::Gaussian { amplitude, center, width } if finite(&[*amplitude, *center]) && *width > 0.0 => Ok(()),
            Payoff::Call { strike } | Payoff::Put { strike } if strike.is_finite() => Ok(()),
            Payoff::Table { xs, values }
                if xs.len() >= 2
                    && xs.len() == values.len()
                    && finite(xs)
                    && finite(values)
                    && xs.windows(2).all(|w| w[1] > w[0]) =>
            {
                Ok(())
            }
            _ => Err(Error::Config("invalid payoff parameters".into())),
        }
    }
}

/// Coefficients, payoff and grid of one worst-case PDE.
#[derive(Debug, Clone, PartialEq)]
pub struct PdeProblem {
    pub sigma: f64,
    pub theta: f64,
    /// Integrand `h(t)`, piecewise constant on `[0, T]`; its last knot is the horizon.
    pub h: StepFunction,
    pub payoff: Payoff,
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub nt: usize,
}

impl PdeProblem {
    pub fn horizon(&self) -> f64 {
        self.h.end()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config("sigma must be positive".into()));
        }
        if !(self.theta >= 0.0 && self.theta.is_finite()) {
            return Err(Error::Config("theta must be nonnegative".into()));
        }
        if self.h.start() != 0.0 || !(self.h.end() > 0.0) {
            return Err(Error::Config("h must be defined on [0, T] with T > 0".into()));
        }
        if !(self.x_min < self.x_max) || !self.x_min.is_finite() || !self.x_max.is_finite() {
            return Err(Error::Config("need x_min < x_max".into()));
        }
        // linear extrapolation at both edges needs two interior nodes
        if self.nx < 4 {
            return Err(Error::Config("nx must be at least 4".into()));
        }
        if self.nt < 1 {
            return Err(Error::Config("nt must be at least 1".into()));
        }
        self.payoff.validate()
    }

    pub fn space_grid(&self) -> Vec<f64> {
        let dx = (self.x_max - self.x_min) / (self.nx - 1) as f64;
        (0..self.nx).map(|i| if i + 1 == self.nx { self.x_max } else { self.x_min + dx * i as f64 }).collect()
    }

    /// Largest `θ |h| Δx` over the pieces of `h`.
    pub fn grid_peclet(&self) -> f64 {
        let dx = (self.x_max - self.x_min) / (self.nx - 1) as f64;
        self.h.values().iter().map(|h| self.theta * h.abs() * dx).fold(0.0, f64::max)
    }
}

/// Value surface on the `(t, x)` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PdeSolution {
    pub times: Vec<f64>,
    pub xs: Vec<f64>,
    /// Row-major with time as the outer index.
    pub values: Vec<f64>,
    pub max_peclet: f64,
}

impl PdeSolution {
    pub fn value(&self, k: usize, i: usize) -> f64 {
        self.values[k * self.xs.len() + i]
    }

    /// Values at time index `k`.
    pub fn slice(&self, k: usize) -> &[f64] {
        let nx = self.xs.len();
        &self.values[k * nx..(k + 1) * nx]
    }

    pub fn peclet_warning(&self) -> bool {
        self.max_peclet > PECLET_LIMIT
    }

    /// Bilinear interpolation inside the grid.
    pub fn value_at(&self, t: f64, x: f64) -> Result<f64> {
        let (t0, t1) = (self.times[0], self.times[self.times.len() - 1]);
        let (x0, x1) = (self.xs[0], self.xs[self.xs.len() - 1]);
        if !(t >= t0 && t <= t1 && x >= x0 && x <= x1) {
            return Err(Error::Domain(alloc::format!("({t}, {x}) is outside the solution grid")));
        }
        let locate = |grid: &[f64], v: f64| {
            let i = grid[1..grid.len() - 1].partition_point(|&g| g <= v);
            (i, (v - grid[i]) / (grid[i + 1] - grid[i]))
        };
        let (k, wt) = locate(&self.times, t);
        let (i, wx) = locate(&self.xs, x);
        let lerp = |k: usize| self.value(k, i) + wx * (self.value(k, i + 1) - self.value(k, i));
        let (a, b) = (lerp(k), lerp(k + 1));
        Ok(if wt == 0.0 { a } else { a + wt * (b - a) })
    }
}

/// Heat kernel of `dx = σ dW` over horizon `T`.
pub fn nominal_kernel(x: f64, x0: f64, horizon: f64, sigma: f64) -> Result<f64> {
    if !(horizon > 0.0) {
        return Err(Error::Domain(alloc::format!("horizon {horizon} must be positive")));
    }
    if !(sigma > 0.0) {
        return Err(Error::Domain(alloc::format!("sigma {sigma} must be positive")));
    }
    let var = sigma * sigma * horizon;
    let d = x - x0;
    Ok((-d * d / (2.0 * var)).exp() / (2.0 * core::f64::consts::PI * var).sqrt())
}

/// Backward Crank–Nicolson march of the worst-case PDE.
///
/// Time steps are aligned with the knots of `h`, so every step sees a
/// constant drift `θσ²h` and source `θσ²h²`. Edge values follow from
/// `∂²V/∂x² = 0`, i.e. linear extrapolation of the two nearest interior
/// nodes, which is eliminated from the first and last interior rows to keep
/// the system tridiagonal.
pub fn solve(problem: &PdeProblem) -> Result<PdeSolution> {
    problem.validate()?;
    let xs = problem.space_grid();
    let times = problem.h.aligned_grid(problem.nt)?;
    let (nx, nt) = (problem.nx, problem.nt);
    let dx = (problem.x_max - problem.x_min) / (nx - 1) as f64;
    let diffusion = 0.5 * problem.sigma * problem.sigma;

    let mut values = alloc::vec![0.0; (nt + 1) * nx];
    for (i, &x) in xs.iter().enumerate() {
        values[nt * nx + i] = problem.payoff.eval(x);
    }

    let m = nx - 2;
    let (mut sub, mut diag, mut sup, mut rhs) =
        (alloc::vec![0.0; m], alloc::vec![0.0; m], alloc::vec![0.0; m], alloc::vec![0.0; m]);
    for k in (1..=nt).rev() {
        let dt = times[k] - times[k - 1];
        let h = problem.h.eval(times[k - 1]);
        let drift = problem.theta * problem.sigma * problem.sigma * h;
        let source = drift * h;
        // L V_i = lo V_{i−1} + mid V_i + up V_{i+1}
        let lo = diffusion / (dx * dx) - drift / (2.0 * dx);
        let mid = -2.0 * diffusion / (dx * dx);
        let up = diffusion / (dx * dx) + drift / (2.0 * dx);

        let (head, tail) = values.split_at_mut(k * nx);
        let prev = &tail[..nx];
        for r in 0..m {
            let i = r + 1;
            rhs[r] = prev[i] + 0.5 * dt * (lo * prev[i - 1] + mid * prev[i] + up * prev[i + 1]) + dt * source;
            sub[r] = -0.5 * dt * lo;
            diag[r] = 1.0 - 0.5 * dt * mid;
            sup[r] = -0.5 * dt * up;
        }
        // V_0 = 2V_1 − V_2 and V_{n−1} = 2V_{n−2} − V_{n−3}
        let (a_lo, a_up) = (sub[0], sup[m - 1]);
        diag[0] += 2.0 * a_lo;
        sup[0] -= a_lo;
        sub[0] = 0.0;
        diag[m - 1] += 2.0 * a_up;
        sub[m - 1] -= a_up;
        sup[m - 1] = 0.0;

        thomas(&sub, &mut diag, &sup, &mut rhs).ok_or(Error::Singular { step: k })?;

        let row = &mut head[(k - 1) * nx..];
        row[1..nx - 1].copy_from_slice(&rhs);
        row[0] = 2.0 * row[1] - row[2];
        row[nx - 1] = 2.0 * row[nx - 2] - row[nx - 3];
    }

    Ok(PdeSolution { times, xs, values, max_peclet: problem.grid_peclet() })
}

/// In-place tridiagonal solve; `diag` is overwritten. `None` on a vanishing
/// or non-finite pivot.
fn thomas(sub: &[f64], diag: &mut [f64], sup: &[f64], rhs: &mut [f64]) -> Option<()> {
    let n = diag.len();
    for i in 1..n {
        if !(diag[i - 1].abs() > 1e-300) {
            return None;
        }
        let w = sub[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    if !(diag[n - 1].abs() > 1e-300) {
        return None;
    }
    rhs[n - 1] /= diag[n - 1];
    for i in (0..n - 1).rev() {
        rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
    }
    rhs.iter().all(|v| v.is_finite()).then_some(())
}

/// Sample mean of the pathwise loss and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

/// Monte Carlo estimate of `V(0, x0)` under the drifted measure
/// `dx = θσ²h dt + σ dW`, with the loss accumulated as
/// `Σ h(t_k)(x_{k+1} − x_k) + g(x_N)` on a knot-aligned grid.
///
/// With piecewise-constant `h` and constant `σ` the Euler–Maruyama increments
/// are exact in law, so the only error is statistical.
pub fn mc_oracle(problem: &PdeProblem, x0: f64, n_paths: usize, n_steps: usize, seed: u64) -> Result<McEstimate> {
    problem.validate()?;
    if n_paths < 100 {
        return Err(Error::Precondition("mc_oracle needs at least 100 paths".into()));
    }
    let times = problem.h.aligned_grid(n_steps)?;
    let steps: Vec<(f64, f64, f64)> = times
        .windows(2)
        .map(|w| {
            let dt = w[1] - w[0];
            let h = problem.h.eval(w[0]);
            (h, problem.theta * problem.sigma * problem.sigma * h * dt, problem.sigma * dt.sqrt())
        })
        .collect();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let (mut mean, mut m2) = (0.0, 0.0);
    for p in 0..n_paths {
        let mut x = x0;
        let mut loss = 0.0;
        for &(h, drift, vol) in &steps {
            let z: f64 = StandardNormal.sample(&mut rng);
            let dx = drift + vol * z;
            loss += h * dx;
            x += dx;
        }
        loss += problem.payoff.eval(x);
        let delta = loss - mean;
        mean += delta / (p + 1) as f64;
        m2 += delta * (loss - mean);
    }
    let var = m2 / (n_paths - 1) as f64;
    Ok(McEstimate { estimate: mean, std_error: (var / n_paths as f64).sqrt() })
}

/// Exponential tilt of the terminal payoff alone, `E[g e^{θg}] / E[e^{θg}]`
/// under the nominal kernel from `x0`.
///
/// With `h ≡ 0` the PDE above returns the untilted `E[g(x_T)]`, whereas the
/// static worst case of the loss `g(x_T)` is this tilted mean; the two are
/// exposed side by side rather than reconciled.
pub fn terminal_tilt(payoff: &Payoff, x0: f64, horizon: f64, sigma: f64, theta: f64) -> Result<f64> {
    payoff.validate()?;
    nominal_kernel(x0, x0, horizon, sigma)?;
    let sd = sigma * horizon.sqrt();
    let rule = CompositeRule::new(x0 - 12.0 * sd, x0 + 12.0 * sd, 400, 16);
    let density = |x: f64| nominal_kernel(x, x0, horizon, sigma).unwrap_or(0.0);
    let shift = theta * rule.integrate(|x| density(x) * payoff.eval(x));
    let z = rule.integrate(|x| density(x) * (theta * payoff.eval(x) - shift).exp());
    let num = rule.integrate(|x| density(x) * payoff.eval(x) * (theta * payoff.eval(x) - shift).exp());
    let v = num / z;
    if !v.is_finite() {
        return Err(Error::Overflow { theta });
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn problem(theta: f64, h: StepFunction, payoff: Payoff) -> PdeProblem {
        PdeProblem { sigma: 0.2, theta, h, payoff, x_min: -2.0, x_max: 2.0, nx: 81, nt: 50 }
    }

    #[test]
    fn martingale_preserves_linear_data() {
        let p = problem(0.0, StepFunction::constant(0.0, 1.0, 0.0).unwrap(), Payoff::Linear { slope: 1.0, intercept: 0.0 });
        let sol = solve(&p).unwrap();
        for k in 0..=p.nt {
            for (i, &x) in sol.xs.iter().enumerate() {
                assert!((sol.value(k, i) - x).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn constant_h_closed_form() {
        let p = problem(2.0, StepFunction::constant(0.0, 1.0, 1.0).unwrap(), Payoff::Zero);
        let sol = solve(&p).unwrap();
        for (k, &t) in sol.times.iter().enumerate() {
            let want = 2.0 * 0.04 * (1.0 - t);
            assert!(sol.slice(k).iter().all(|v| (v - want).abs() < 1e-13));
        }
        assert!((sol.value_at(0.0, 0.3).unwrap() - 0.08).abs() < 1e-13);
    }

    #[test]
    fn terminal_row_is_the_payoff() {
        let g = Payoff::Call { strike: 0.1 };
        let p = problem(1.0, StepFunction::new(vec![0.0, 0.5, 1.0], vec![1.0, -0.5]).unwrap(), g.clone());
        let sol = solve(&p).unwrap();
        for (i, &x) in sol.xs.iter().enumerate() {
            assert_eq!(sol.value(p.nt, i), g.eval(x));
            assert_eq!(sol.value_at(1.0, x).unwrap(), g.eval(x));
        }
        assert!(sol.times.contains(&0.5));
    }

    #[test]
    fn kernel_shape() {
        let peak = nominal_kernel(1.0, 1.0, 2.0, 0.5).unwrap();
        assert!((peak - 1.0 / (2.0 * core::f64::consts::PI * 0.5).sqrt()).abs() < 1e-15);
        assert_eq!(nominal_kernel(1.3, 1.0, 2.0, 0.5).unwrap(), nominal_kernel(0.7, 1.0, 2.0, 0.5).unwrap());
        assert!(nominal_kernel(0.0, 0.0, 0.0, 1.0).is_err());
        let total = CompositeRule::new(-10.0, 10.0, 100, 16).integrate(|x| nominal_kernel(x, 0.5, 1.5, 0.8).unwrap());
        assert!((total - 1.0).abs() < 1e-8);
    }

    #[test]
    fn small_grids_are_rejected() {
        let mut p = problem(0.0, StepFunction::constant(0.0, 1.0, 0.0).unwrap(), Payoff::Zero);
        p.nx = 3;
        assert!(matches!(solve(&p), Err(Error::Config(_))));
    }

    #[test]
    fn high_peclet_is_flagged() {
        let mut p = problem(50.0, StepFunction::constant(0.0, 1.0, 3.0).unwrap(), Payoff::Zero);
        p.nx = 5;
        assert!(solve(&p).unwrap().peclet_warning());
    }

    #[test]
    fn table_payoff_interpolates_and_extrapolates() {
        let g = Payoff::Table { xs: vec![0.0, 1.0, 3.0], values: vec![0.0, 2.0, 0.0] };
        assert_eq!(g.eval(0.5), 1.0);
        assert_eq!(g.eval(2.0), 1.0);
        assert_eq!(g.eval(4.0), -1.0);
        assert_eq!(g.eval(-1.0), -2.0);
    }

    #[test]
    fn terminal_tilt_exceeds_untilted_mean() {
        let g = Payoff::Linear { slope: 1.0, intercept: 0.0 };
        // Gaussian terminal law: tilt by θ shifts the mean by θσ²T
        let v = terminal_tilt(&g, 0.0, 1.0, 0.2, 2.0).unwrap();
        assert!((v - 0.08).abs() < 1e-10);
    }
}
