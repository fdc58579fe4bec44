use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Right-continuous piecewise-constant function on `[knots[0], knots[last]]`.
///
/// Takes `values[i]` on `[knots[i], knots[i + 1])`; the final value also holds
/// at the right end point.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Config("step function needs at least one piece".into()));
        }
        if knots.len() != values.len() + 1 {
            return Err(Error::Dimension { expected: values.len() + 1, found: knots.len() });
        }
        if knots.iter().chain(values.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Config("step function knots and values must be finite".into()));
        }
        if knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("step function knots must be strictly increasing".into()));
        }
        Ok(Self { knots, values })
    }

    /// A single constant piece on `[start, end]`.
    pub fn constant(start: f64, end: f64, value: f64) -> Result<Self> {
        Self::new(alloc::vec![start, end], alloc::vec![value])
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn start(&self) -> f64 {
        self.knots[0]
    }

    pub fn end(&self) -> f64 {
        self.knots[self.knots.len() - 1]
    }

    /// Value at `t`, clamped to the end pieces outside the support.
    pub fn eval(&self, t: f64) -> f64 {
        let idx = self.knots[1..self.knots.len() - 1].partition_point(|&k| k <= t);
        self.values[idx]
    }

    /// Exact `∫_{start}^{t} f`, with `t` clamped to the support.
    pub fn integral_to(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for (i, &v) in self.values.iter().enumerate() {
            let (a, b) = (self.knots[i], self.knots[i + 1]);
            if t <= a {
                break;
            }
            acc += v * (b.min(t) - a);
        }
        acc
    }

    /// Exact `∫ f²` over the full support.
    pub fn integral_of_square(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| v * v * (self.knots[i + 1] - self.knots[i]))
            .sum()
    }

    /// Partition of the support into `total_steps` intervals such that every
    /// knot is a grid point. Each piece gets at least one step; the rest are
    /// distributed by length.
    pub fn aligned_grid(&self, total_steps: usize) -> Result<Vec<f64>> {
        let pieces = self.values.len();
        if total_steps < pieces {
            return Err(Error::Config(alloc::format!(
                "{total_steps} time steps cannot resolve {pieces} pieces"
            )));
        }
        let span = self.end() - self.start();
        let ideal: Vec<f64> = (0..pieces)
            .map(|i| (self.knots[i + 1] - self.knots[i]) / span * total_steps as f64)
            .collect();
        let mut counts: Vec<usize> = ideal.iter().map(|&x| (x as usize).max(1)).collect();
        let mut assigned: usize = counts.iter().sum();
        // largest-remainder correction
        while assigned < total_steps {
            let i = (0..pieces)
                .max_by(|&a, &b| (ideal[a] - counts[a] as f64).total_cmp(&(ideal[b] - counts[b] as f64)))
                .unwrap();
            counts[i] += 1;
            assigned += 1;
        }
        while assigned > total_steps {
            let i = (0..pieces)
                .filter(|&i| counts[i] > 1)
                .min_by(|&a, &b| (ideal[a] - counts[a] as f64).total_cmp(&(ideal[b] - counts[b] as f64)))
                .unwrap();
            counts[i] -= 1;
            assigned -= 1;
        }
        let mut grid = Vec::with_capacity(total_steps + 1);
        grid.push(self.knots[0]);
        for (i, &c) in counts.iter().enumerate() {
            let (a, b) = (self.knots[i], self.knots[i + 1]);
            for s in 1..c {
                grid.push(a + (b - a) * s as f64 / c as f64);
            }
            grid.push(b);
        }
        Ok(grid)
    }
}
