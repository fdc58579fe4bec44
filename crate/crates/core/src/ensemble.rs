//! Loss samples, measure changes and their ensemble form.
//!
//! A [`LossSample`] is the model-risk view: losses `ℓ_j` with nominal weights
//! `p_j`. A [`DiscreteEnsemble`] is the thermodynamic view of the same object:
//! energy levels `ε_i = −ℓ_i` with densities of states `n_i` (aggregated
//! nominal probability) and occupations `f_i`. A [`MeasureChange`] `m` maps to
//! occupations through `f = m` once the microstate count is absorbed into `n`.

use alloc::vec::Vec;
use core::cmp::Ordering;

#[allow(unused_imports)] // inherent methods shadow it when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::math::{log_sum_exp, xlogx};

/// Tolerance on normalization sums for in-memory objects.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Losses `ℓ_j` with nominal probabilities `p_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct LossSample {
    losses: Vec<f64>,
    probs: Vec<f64>,
}

impl LossSample {
    /// Builds a sample whose probabilities already sum to one (within 1e−12).
    pub fn new(losses: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        check_pairs(&losses, &probs)?;
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Precondition(alloc::format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self { losses, probs })
    }

    /// Builds a sample from nonnegative weights, rescaling them to sum to one.
    pub fn from_weights(losses: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        check_pairs(&losses, &weights)?;
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::Precondition("weights must have a positive finite sum".into()));
        }
        let probs = weights.into_iter().map(|w| w / total).collect();
        Ok(Self { losses, probs })
    }

    /// Equally weighted sample.
    pub fn uniform(losses: Vec<f64>) -> Result<Self> {
        let n = losses.len();
        Self::from_weights(losses, alloc::vec![1.0; n])
    }

    pub fn losses(&self) -> &[f64] {
        &self.losses
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.losses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.losses.is_empty()
    }

    /// `(ℓ_j, p_j)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + Clone + '_ {
        self.losses.iter().copied().zip(self.probs.iter().copied())
    }

    /// Nominal expected loss `Σ p_j ℓ_j`.
    pub fn mean(&self) -> f64 {
        self.iter().map(|(l, p)| p * l).sum()
    }

    /// Smallest loss carrying positive probability.
    pub fn min_loss(&self) -> f64 {
        self.iter().filter(|&(_, p)| p > 0.0).map(|(l, _)| l).fold(f64::INFINITY, f64::min)
    }

    /// Largest loss carrying positive probability.
    pub fn max_loss(&self) -> f64 {
        self.iter().filter(|&(_, p)| p > 0.0).map(|(l, _)| l).fold(f64::NEG_INFINITY, f64::max)
    }

    /// `max ℓ − min ℓ` over the support.
    pub fn spread(&self) -> f64 {
        self.max_loss() - self.min_loss()
    }

    /// Total nominal probability of the states attaining the maximal loss.
    pub fn max_loss_mass(&self) -> f64 {
        let top = self.max_loss();
        self.iter().filter(|&(l, _)| l == top).map(|(_, p)| p).sum()
    }

    /// Checks that `m` is a normalized measure change for this sample.
    pub fn check_measure(&self, m: &MeasureChange) -> Result<()> {
        if m.len() != self.len() {
            return Err(Error::Dimension { expected: self.len(), found: m.len() });
        }
        let total: f64 = self.probs.iter().zip(m.values()).map(|(p, m)| p * m).sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Precondition(alloc::format!(
                "measure change has E_p[m] = {total}, not 1"
            )));
        }
        Ok(())
    }
}

fn check_pairs(losses: &[f64], probs: &[f64]) -> Result<()> {
    if losses.is_empty() {
        return Err(Error::Precondition("sample is empty".into()));
    }
    if losses.len() != probs.len() {
        return Err(Error::Dimension { expected: losses.len(), found: probs.len() });
    }
    if let Some(l) = losses.iter().find(|l| !l.is_finite()) {
        return Err(Error::Domain(alloc::format!("non-finite loss {l}")));
    }
    if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
        return Err(Error::Domain(alloc::format!("invalid probability {p}")));
    }
    Ok(())
}

/// Radon–Nikodym weights `m_j = dQ/dP` at each sample point.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureChange {
    values: Vec<f64>,
}

impl MeasureChange {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(m) = values.iter().find(|m| !(m.is_finite() && **m >= 0.0)) {
            return Err(Error::Domain(alloc::format!("measure change weight {m} is not a nonnegative finite number")));
        }
        Ok(Self { values })
    }

    /// The identity change `m ≡ 1`.
    pub fn identity(len: usize) -> Self {
        Self { values: alloc::vec![1.0; len] }
    }

    /// Rescales nonnegative raw weights so that `E_p[m] = 1`.
    pub fn normalized(raw: Vec<f64>, sample: &LossSample) -> Result<Self> {
        let m = Self::new(raw)?;
        if m.len() != sample.len() {
            return Err(Error::Dimension { expected: sample.len(), found: m.len() });
        }
        let total: f64 = sample.probs().iter().zip(&m.values).map(|(p, m)| p * m).sum();
        if !(total > 0.0) {
            return Err(Error::Precondition("raw weights vanish on the support".into()));
        }
        Ok(Self { values: m.values.into_iter().map(|v| v / total).collect() })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Expected loss under `p`, or under `Q = m·P` when a measure change is given.
pub fn expected_loss(sample: &LossSample, m: Option<&MeasureChange>) -> Result<f64> {
    match m {
        None => Ok(sample.mean()),
        Some(m) => {
            if m.len() != sample.len() {
                return Err(Error::Dimension { expected: sample.len(), found: m.len() });
            }
            Ok(sample.iter().zip(m.values()).map(|((l, p), m)| p * m * l).sum())
        }
    }
}

/// Relative entropy `η = E_p[m ln m]` of `Q = m·P` with respect to `P`.
pub fn relative_entropy(m: &MeasureChange, sample: &LossSample) -> Result<f64> {
    sample.check_measure(m)?;
    let eta: f64 = sample.probs().iter().zip(m.values()).map(|(&p, &m)| p * xlogx(m)).sum();
    Ok(eta.max(0.0))
}

/// One energy level and its density of states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    pub energy: f64,
    pub density: f64,
}

/// Energy levels with densities of states and per-microstate occupations.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteEnsemble {
    levels: Vec<Level>,
    occupation: Vec<f64>,
    normalized: bool,
}

impl DiscreteEnsemble {
    /// Validates the level structure and records whether `Σ n_i f_i = 1`.
    pub fn new(levels: Vec<Level>, occupation: Vec<f64>) -> Result<Self> {
        check_levels(&levels)?;
        if occupation.len() != levels.len() {
            return Err(Error::Dimension { expected: levels.len(), found: occupation.len() });
        }
        if let Some(f) = occupation.iter().find(|f| !(f.is_finite() && **f >= 0.0)) {
            return Err(Error::Domain(alloc::format!("invalid occupation {f}")));
        }
        let total: f64 = levels.iter().zip(&occupation).map(|(l, f)| l.density * f).sum();
        let normalized = (total - 1.0).abs() <= NORMALIZATION_TOL;
        Ok(Self { levels, occupation, normalized })
    }

    /// Canonical (Boltzmann) ensemble `f_i = e^{−βε_i}/Z(β)` on the given levels.
    pub fn boltzmann(levels: Vec<Level>, beta: f64) -> Result<Self> {
        check_levels(&levels)?;
        let log_z = log_partition(&levels, beta);
        if !log_z.is_finite() {
            return Err(Error::Overflow { theta: beta });
        }
        let occupation = levels.iter().map(|l| (-beta * l.energy - log_z).exp()).collect();
        Self::new(levels, occupation)
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn occupation(&self) -> &[f64] {
        &self.occupation
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// `Σ n_i f_i`.
    pub fn particle_number(&self) -> f64 {
        self.levels.iter().zip(&self.occupation).map(|(l, f)| l.density * f).sum()
    }

    /// Copy rescaled so that `Σ n_i f_i = 1`.
    pub fn normalize(&self) -> Result<Self> {
        let total = self.particle_number();
        if !(total > 0.0) {
            return Err(Error::State("ensemble has no occupied level".into()));
        }
        let occupation = self.occupation.iter().map(|f| f / total).collect();
        Ok(Self { levels: self.levels.clone(), occupation, normalized: true })
    }

    /// Probability of each level, `n_i f_i / Σ n f`.
    pub fn level_probabilities(&self) -> Result<Vec<f64>> {
        let total = self.particle_number();
        if !(total > 0.0) {
            return Err(Error::State("ensemble has no occupied level".into()));
        }
        Ok(self.levels.iter().zip(&self.occupation).map(|(l, f)| l.density * f / total).collect())
    }

    /// Mean energy per particle, `Σ n f ε / Σ n f`.
    pub fn internal_energy(&self) -> Result<f64> {
        let probs = self.level_probabilities()?;
        Ok(probs.iter().zip(&self.levels).map(|(p, l)| p * l.energy).sum())
    }

    /// Measure change read off the occupations: `m_i = f_i · Σ n`, paired with
    /// [`to_sample`]'s probabilities `p_i = n_i / Σ n`.
    pub fn measure_change(&self) -> MeasureChange {
        let total: f64 = self.levels.iter().map(|l| l.density).sum();
        MeasureChange { values: self.occupation.iter().map(|f| f * total).collect() }
    }
}

fn check_levels(levels: &[Level]) -> Result<()> {
    if levels.is_empty() {
        return Err(Error::Config("ensemble has no levels".into()));
    }
    for l in levels {
        if !l.energy.is_finite() {
            return Err(Error::Domain(alloc::format!("non-finite energy {}", l.energy)));
        }
        if !(l.density > 0.0 && l.density.is_finite()) {
            return Err(Error::Domain(alloc::format!("density {} is not positive", l.density)));
        }
    }
    if levels.windows(2).any(|w| w[1].energy <= w[0].energy) {
        return Err(Error::Config("energies must be strictly increasing".into()));
    }
    Ok(())
}

/// `ln Z(β) = ln Σ n_i e^{−βε_i}`.
pub fn log_partition(levels: &[Level], beta: f64) -> f64 {
    log_sum_exp(levels.iter().map(|l| (l.density, -beta * l.energy)))
}

/// Gibbs entropy `S = −Σ n_i f_i ln f_i` of a normalized ensemble.
pub fn shannon_entropy(e: &DiscreteEnsemble) -> Result<f64> {
    if !e.is_normalized() {
        return Err(Error::State("entropy requires a normalized ensemble".into()));
    }
    Ok(-e.levels.iter().zip(&e.occupation).map(|(l, &f)| l.density * xlogx(f)).sum::<f64>())
}

/// Ensemble form of a sample: `ε = −ℓ`, densities from aggregated nominal
/// mass, occupations from `m` (identity when absent).
///
/// Equal losses merge into one level; the merged occupation is the
/// `p`-weighted mean of their `m`. Levels come out in increasing energy, so
/// decreasing loss.
pub fn to_ensemble(sample: &LossSample, m: Option<&MeasureChange>) -> Result<DiscreteEnsemble> {
    if let Some(m) = m {
        sample.check_measure(m)?;
    }
    let mut idx: Vec<usize> = (0..sample.len()).filter(|&j| sample.probs()[j] > 0.0).collect();
    idx.sort_by(|&a, &b| {
        sample.losses()[b].partial_cmp(&sample.losses()[a]).unwrap_or(Ordering::Equal)
    });
    let mut levels: Vec<Level> = Vec::new();
    let mut mass_weighted_m: Vec<f64> = Vec::new();
    for j in idx {
        let (loss, p) = (sample.losses()[j], sample.probs()[j]);
        let mj = m.map_or(1.0, |m| m.values()[j]);
        match levels.last_mut() {
            Some(last) if last.energy == -loss => {
                last.density += p;
                *mass_weighted_m.last_mut().unwrap() += p * mj;
            }
            _ => {
                levels.push(Level { energy: -loss, density: p });
                mass_weighted_m.push(p * mj);
            }
        }
    }
    let occupation = levels.iter().zip(&mass_weighted_m).map(|(l, pm)| pm / l.density).collect();
    DiscreteEnsemble::new(levels, occupation)
}

/// Sample form of an ensemble: `ℓ = −ε`, `p_i = n_i / Σ n`.
///
/// The occupations are available through [`DiscreteEnsemble::measure_change`].
pub fn to_sample(e: &DiscreteEnsemble) -> Result<LossSample> {
    let losses = e.levels.iter().map(|l| -l.energy).collect();
    let weights = e.levels.iter().map(|l| l.density).collect();
    LossSample::from_weights(losses, weights)
}
