//! Simulated thermalization: an ensemble Monte Carlo that finds the
//! multiplier for a given risk level.
//!
//! The nominal measure is binned onto an arithmetic ladder of energies
//! `ε_m = −mΔ`, `m = 1..N`, so that every decay `ε_i → ε_j + ε_k` is just
//! `m_i = m_j + m_k`. Occupations start flat, scaled so the total energy
//! `Σ n_m f_m ε_m` equals `−V`. Each step picks an admissible triple and moves
//! probability along the net decay flow `(f_i − f_j f_k) n_i n_j n_k`, which
//! conserves total energy exactly but not particle number. The fixed points
//! are exactly the profiles `f_m = e^{−βε_m}`, and `β` is read off by a
//! weighted regression of `ln f` on `ε`.
//!
//! The module also carries the equilibrium diagnostics: free energy of an
//! arbitrary occupation profile and the net logarithmic transition rate
//! toward the canonical ensemble.

use alloc::vec::Vec;

#[allow(unused_imports)] // inherent methods shadow it when std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::ensemble::{log_partition, DiscreteEnsemble, Level, LossSample};
use crate::error::{Error, Result};
use crate::math::{weighted_linear_fit, xlogx};

/// Density assigned to levels that receive no nominal mass.
pub const EMPTY_BIN_DENSITY: f64 = 1e-12;
/// Iterations between convergence checks.
pub const WINDOW: u64 = 1000;
/// Minimum r² of the exponential fit for a run to count as converged.
pub const MIN_R_SQUARED: f64 = 0.999;
pub const DEFAULT_LEARNING_RATE: f64 = 0.1;
pub const DEFAULT_TOLERANCE: f64 = 1e-7;

/// One admissible decay `m_i = m_j + m_k`, `j ≤ k`, as zero-based indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Triple {
    pub i: usize,
    pub j: usize,
    pub k: usize,
}

/// Evolving unnormalized ensemble on the arithmetic energy ladder.
///
/// Index `idx` holds level `m = idx + 1`, energy `−(idx + 1)Δ`.
#[derive(Debug, Clone)]
pub struct ThermalizationState {
    spacing: f64,
    densities: Vec<f64>,
    occupation: Vec<f64>,
    total_energy: f64,
    iteration: u64,
    seed: u64,
    rng: SplitMix64,
    triples: Vec<Triple>,
}

fn admissible_triples(levels: usize) -> Vec<Triple> {
    let mut out = Vec::new();
    for mi in 2..=levels {
        for mj in 1..=mi / 2 {
            out.push(Triple { i: mi - 1, j: mj - 1, k: mi - mj - 1 });
        }
    }
    out
}

impl ThermalizationState {
    /// Builds the ladder from a nonnegative loss sample and scales flat
    /// occupations to total energy `−v_target`.
    ///
    /// `Δ = max ℓ / n_levels`; each sample point lands on the nearest rung
    /// (clamped to `1..=n_levels`).
    pub fn new(sample: &LossSample, v_target: f64, n_levels: usize, seed: u64) -> Result<Self> {
        if n_levels == 0 {
            return Err(Error::Config("need at least one energy level".into()));
        }
        if sample.iter().any(|(l, p)| p > 0.0 && l < 0.0) {
            return Err(Error::Precondition("losses must be nonnegative to sit on the energy ladder".into()));
        }
        let max_loss = sample.max_loss();
        if !(max_loss > 0.0) {
            return Err(Error::Precondition("largest loss must be positive".into()));
        }
        let spacing = max_loss / n_levels as f64;
        let mut densities = alloc::vec![0.0; n_levels];
        for (l, p) in sample.iter() {
            let m = ((l / spacing).round() as usize).clamp(1, n_levels);
            densities[m - 1] += p;
        }
        for n in densities.iter_mut().filter(|n| **n == 0.0) {
            *n = EMPTY_BIN_DENSITY;
        }
        let mass: f64 = densities.iter().sum();
        if !(v_target > 0.0 && v_target < max_loss * mass) {
            return Err(Error::Range(alloc::format!(
                "target risk {v_target} is outside (0, {})",
                max_loss * mass
            )));
        }
        let ladder_energy: f64 = densities.iter().enumerate().map(|(idx, n)| n * (idx + 1) as f64 * spacing).sum();
        let occupation = alloc::vec![v_target / ladder_energy; n_levels];
        Self::from_parts(spacing, densities, occupation, seed).map(|mut s| {
            s.total_energy = -v_target;
            s
        })
    }

    /// State with explicit densities and occupations on the ladder.
    pub fn from_parts(spacing: f64, densities: Vec<f64>, occupation: Vec<f64>, seed: u64) -> Result<Self> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::Config("grid spacing must be positive".into()));
        }
        if densities.is_empty() || densities.len() != occupation.len() {
            return Err(Error::Dimension { expected: densities.len(), found: occupation.len() });
        }
        if densities.iter().any(|n| !(*n > 0.0 && n.is_finite())) {
            return Err(Error::Domain("densities must be positive".into()));
        }
        if occupation.iter().any(|f| !(*f >= 0.0 && f.is_finite())) {
            return Err(Error::Domain("occupations must be nonnegative".into()));
        }
        let triples = admissible_triples(densities.len());
        let mut state = Self {
            spacing,
            densities,
            occupation,
            total_energy: 0.0,
            iteration: 0,
            seed,
            rng: SplitMix64::seed_from_u64(seed),
            triples,
        };
        state.total_energy = state.energy();
        Ok(state)
    }

    /// State occupied by `f_m = e^{−βε_m} = e^{βmΔ}`.
    pub fn boltzmann(spacing: f64, densities: Vec<f64>, beta: f64, seed: u64) -> Result<Self> {
        let occupation = (1..=densities.len()).map(|m| (beta * m as f64 * spacing).exp()).collect();
        Self::from_parts(spacing, densities, occupation, seed)
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn densities(&self) -> &[f64] {
        &self.densities
    }

    pub fn occupation(&self) -> &[f64] {
        &self.occupation
    }

    /// Energy of level index `idx`.
    pub fn level_energy(&self, idx: usize) -> f64 {
        -((idx + 1) as f64) * self.spacing
    }

    /// Conserved target total energy `−V`.
    pub fn total_energy(&self) -> f64 {
        self.total_energy
    }

    /// `Σ n_m f_m ε_m` recomputed from the current occupations.
    pub fn energy(&self) -> f64 {
        self.densities
            .iter()
            .zip(&self.occupation)
            .enumerate()
            .map(|(idx, (n, f))| n * f * self.level_energy(idx))
            .sum()
    }

    /// `Σ n_m f_m`.
    pub fn particle_number(&self) -> f64 {
        self.densities.iter().zip(&self.occupation).map(|(n, f)| n * f).sum()
    }

    /// `total_energy / Σ n f`.
    pub fn mean_particle_energy(&self) -> f64 {
        self.total_energy / self.particle_number()
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    /// Raw decay flow `(f_i − f_j f_k) n_i n_j n_k` of a triple.
    pub fn flow(&self, t: Triple) -> f64 {
        let (f, n) = (&self.occupation, &self.densities);
        (f[t.i] - f[t.j] * f[t.k]) * n[t.i] * n[t.j] * n[t.k]
    }

    /// Applies `δ = learning_rate · flow`, clipped so no occupation turns
    /// negative. Returns the applied `δ`.
    pub fn apply(&mut self, t: Triple, learning_rate: f64) -> f64 {
        let (f, n) = (&mut self.occupation, &self.densities);
        let mut delta = learning_rate * (f[t.i] - f[t.j] * f[t.k]) * n[t.i] * n[t.j] * n[t.k];
        // i loses δ/n_i; j and k gain δ/n_j and δ/n_k (twice when j = k)
        let upper = f[t.i] * n[t.i];
        let lower = if t.j == t.k {
            -0.5 * f[t.j] * n[t.j]
        } else {
            -(f[t.j] * n[t.j]).min(f[t.k] * n[t.k])
        };
        delta = delta.clamp(lower, upper);
        f[t.i] = (f[t.i] - delta / n[t.i]).max(0.0);
        f[t.j] += delta / n[t.j];
        f[t.k] += delta / n[t.k];
        delta
    }

    /// One Monte Carlo step on a uniformly drawn admissible triple.
    pub fn step(&mut self, learning_rate: f64) -> Result<f64> {
        if self.triples.is_empty() {
            return Err(Error::Config("fewer than two levels admit no decay".into()));
        }
        if !(learning_rate > 0.0 && learning_rate <= 1.0) {
            return Err(Error::Config(alloc::format!("learning rate {learning_rate} not in (0, 1]")));
        }
        let t = self.triples[self.rng.random_range(0..self.triples.len())];
        self.iteration += 1;
        Ok(self.apply(t, learning_rate))
    }

    /// Largest `|flow|` over all admissible triples.
    pub fn max_flow(&self) -> f64 {
        self.triples.iter().map(|&t| self.flow(t).abs()).fold(0.0, f64::max)
    }

    /// Weighted fit of `ln f_m = c − β ε_m` (weights `n_m f_m`, levels with
    /// `f_m < 1e−300` skipped). Returns `(β, r²)`.
    pub fn fit_beta(&self) -> Option<(f64, f64)> {
        let pts: Vec<(f64, f64, f64)> = self
            .occupation
            .iter()
            .zip(&self.densities)
            .enumerate()
            .filter(|(_, (f, _))| **f >= 1e-300)
            .map(|(idx, (f, n))| (self.level_energy(idx), f.ln(), n * f))
            .collect();
        weighted_linear_fit(&pts).map(|(_, slope, r2)| (-slope, r2))
    }

    /// Ensemble view with levels in increasing energy (deepest rung first).
    pub fn ensemble(&self) -> Result<DiscreteEnsemble> {
        let n = self.densities.len();
        let levels = (0..n).rev().map(|idx| Level { energy: self.level_energy(idx), density: self.densities[idx] }).collect();
        let occupation = (0..n).rev().map(|idx| self.occupation[idx]).collect();
        DiscreteEnsemble::new(levels, occupation)
    }

    /// Runs [`step`](Self::step) until the mean particle energy settles.
    ///
    /// Every [`WINDOW`] iterations the mean particle energy is compared with
    /// its value one window earlier; the run stops once the relative change
    /// is below `tol` and the exponential fit reaches [`MIN_R_SQUARED`].
    /// Exhausting `max_iters` is reported through `converged = false`.
    pub fn run(&mut self, learning_rate: f64, max_iters: u64, tol: f64) -> Result<ThermalizationResult> {
        if !(tol > 0.0) {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        let mut snapshots: Vec<(u64, f64, f64, f64, Vec<f64>)> = Vec::new();
        let snapshot = |s: &Self| {
            let p = s.particle_number();
            (s.iteration, s.total_energy / p, s.energy(), p, s.occupation.clone())
        };
        snapshots.push(snapshot(self));
        let mut prev_mean = self.mean_particle_energy();
        let mut converged = false;
        let start = self.iteration;
        while self.iteration - start < max_iters {
            self.step(learning_rate)?;
            if (self.iteration - start).is_multiple_of(WINDOW) {
                snapshots.push(snapshot(self));
                let mean = self.mean_particle_energy();
                let change = (mean - prev_mean).abs() / mean.abs();
                prev_mean = mean;
                if change < tol && self.fit_beta().is_some_and(|(_, r2)| r2 >= MIN_R_SQUARED) {
                    converged = true;
                    break;
                }
            }
        }
        let (beta, r_squared) = self
            .fit_beta()
            .ok_or_else(|| Error::NoConvergence("occupations too degenerate to fit".into()))?;

        let energies: Vec<f64> = (0..self.densities.len()).map(|idx| self.level_energy(idx)).collect();
        let trace = snapshots
            .into_iter()
            .map(|(iteration, mean, energy, particles, f)| TraceRow {
                iteration,
                mean_particle_energy: mean,
                total_energy: energy,
                particle_number: particles,
                kl_to_boltzmann: ladder_kl(&energies, &self.densities, &f, beta),
            })
            .collect();
        Ok(ThermalizationResult {
            beta,
            r_squared,
            iterations_used: self.iteration - start,
            converged,
            seed: self.seed,
            trace,
        })
    }
}

/// `D(p̂ ∥ p_bz(β))` for occupations on the ladder.
fn ladder_kl(energies: &[f64], densities: &[f64], occupation: &[f64], beta: f64) -> f64 {
    let p_total: f64 = densities.iter().zip(occupation).map(|(n, f)| n * f).sum();
    let log_z = crate::math::log_sum_exp(densities.iter().zip(energies).map(|(&n, &e)| (n, -beta * e)));
    densities
        .iter()
        .zip(occupation)
        .zip(energies)
        .map(|((&n, &f), &e)| {
            let p = n * f / p_total;
            if p == 0.0 {
                0.0
            } else {
                p * (p.ln() - (n.ln() - beta * e - log_z))
            }
        })
        .sum()
}

/// Snapshot of a run, taken every [`WINDOW`] iterations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iteration: u64,
    pub mean_particle_energy: f64,
    /// `Σ n f ε` recomputed at the snapshot.
    pub total_energy: f64,
    pub particle_number: f64,
    /// Relative entropy of the snapshot to the canonical ensemble at the
    /// final fitted `β`.
    pub kl_to_boltzmann: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThermalizationResult {
    pub beta: f64,
    pub r_squared: f64,
    pub iterations_used: u64,
    pub converged: bool,
    pub seed: u64,
    pub trace: Vec<TraceRow>,
}

impl ThermalizationResult {
    pub fn mean_particle_energy_trace(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.trace.iter().map(|r| (r.iteration, r.mean_particle_energy))
    }

    /// Largest relative deviation of the recomputed total energy from the
    /// first snapshot.
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.trace[0].total_energy;
        self.trace.iter().map(|r| ((r.total_energy - e0) / e0).abs()).fold(0.0, f64::max)
    }
}

/// Canonical level probabilities `n_m e^{−βε_m} / Z(β)`.
pub fn boltzmann_probabilities(levels: &[Level], beta: f64) -> Vec<f64> {
    let log_z = log_partition(levels, beta);
    levels.iter().map(|l| (l.density.ln() - beta * l.energy - log_z).exp()).collect()
}

/// `Z(β) = Σ n e^{−βε}`; the internal-equilibrium partition function used for
/// `z_neq` when the caller has no better choice.
pub fn partition_function(levels: &[Level], beta: f64) -> f64 {
    log_partition(levels, beta).exp()
}

/// Net logarithmic rate of the transition from the occupation profile `e`
/// toward the canonical ensemble: `D(p̂ ∥ p_bz) − β ln(z_neq / z_eq)`.
///
/// `p̂` is `e` normalized over microstates.
pub fn transition_rate_estimate(e: &DiscreteEnsemble, beta: f64, z_neq: f64, z_eq: f64) -> Result<f64> {
    if !(z_neq > 0.0 && z_eq > 0.0) {
        return Err(Error::Domain("partition functions must be positive".into()));
    }
    let p_hat = e.level_probabilities()?;
    let p_bz = boltzmann_probabilities(e.levels(), beta);
    let mut kl = 0.0;
    for (&p, &q) in p_hat.iter().zip(&p_bz) {
        if p > 0.0 {
            if q == 0.0 {
                return Err(Error::Domain("occupied level has no canonical weight".into()));
            }
            kl += p * (p / q).ln();
        }
    }
    Ok(kl - beta * (z_neq / z_eq).ln())
}

/// Helmholtz free energy `A = U − S/β` of the normalized profile `e`, where
/// `S = −Σ n f̂ ln f̂`. Equals `−β⁻¹ ln Z(β)` on the canonical ensemble and
/// exceeds it everywhere else.
pub fn free_energy(e: &DiscreteEnsemble, beta: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::Domain(alloc::format!("inverse temperature {beta} must be positive")));
    }
    let p_hat = e.level_probabilities()?;
    let u: f64 = p_hat.iter().zip(e.levels()).map(|(p, l)| p * l.energy).sum();
    let s: f64 = -p_hat.iter().zip(e.levels()).map(|(&p, l)| l.density * xlogx(p / l.density)).sum::<f64>();
    Ok(u - s / beta)
}
