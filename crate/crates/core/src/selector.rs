//! Per-individual choice between the original and the Eigen coordinate
//! system, adapted by reward and punishment ("use it or lose it").

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoordinateSystem {
    Original,
    Eigen,
}

/// Which frame produced an offspring and whether it improved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutcomeRecord {
    pub system: CoordinateSystem,
    pub improved: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectorParams {
    /// Reward constriction `ε ∈ (0, 1]`.
    pub epsilon: f64,
    /// Punishment coefficient `η ∈ (0, 1)`.
    pub eta: f64,
}

impl Default for SelectorParams {
    fn default() -> Self {
        SelectorParams {
            epsilon: 0.1,
            eta: 0.1,
        }
    }
}

impl SelectorParams {
    pub fn new(epsilon: f64, eta: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::InvalidArgument("epsilon must lie in (0, 1]"));
        }
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::InvalidArgument("eta must lie in (0, 1)"));
        }
        Ok(SelectorParams { epsilon, eta })
    }
}

/// Eigen iff `u ≤ p_i`.
pub fn choose_system(p_i: f64, u: f64) -> CoordinateSystem {
    if u <= p_i {
        CoordinateSystem::Eigen
    } else {
        CoordinateSystem::Original
    }
}

/// `r(x) = ε(1 − x)e^(−2x)` on `[0, 1]`.
pub fn reward(x: f64, epsilon: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidArgument("reward argument outside [0, 1]"));
    }
    Ok(reward_unchecked(x, epsilon))
}

fn reward_unchecked(x: f64, epsilon: f64) -> f64 {
    epsilon * (1.0 - x) * libm::exp(-2.0 * x)
}

/// One adaptation step for a single individual, without clamping. Rewards
/// are damped towards the bounds, so sequences starting inside the interval
/// stay there at the default rates, but a punishment applied at `p_i < η·ε`
/// (or `p_i > 1 − η·ε`) leaves it.
pub fn update_probability(p_i: f64, outcome: OutcomeRecord, params: SelectorParams) -> f64 {
    let (eps, eta) = (params.epsilon, params.eta);
    match (outcome.system, outcome.improved) {
        (CoordinateSystem::Eigen, true) => p_i + reward_unchecked(p_i, eps),
        (CoordinateSystem::Eigen, false) => p_i - eta * reward_unchecked(p_i, eps),
        (CoordinateSystem::Original, true) => p_i - reward_unchecked(1.0 - p_i, eps),
        (CoordinateSystem::Original, false) => p_i + eta * reward_unchecked(1.0 - p_i, eps),
    }
}

/// PSO: the new position beats the personal best (strictly).
pub fn classify_outcome_pso(new_fitness: f64, pbest_fitness: f64) -> bool {
    new_fitness < pbest_fitness
}

/// DE: the trial vector beats its target (strictly).
pub fn classify_outcome_de(trial_fitness: f64, target_fitness: f64) -> bool {
    trial_fitness < target_fitness
}

/// Eigen-frame selection ratio of every individual.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    /// All entries 0.5.
    pub fn new(np: usize) -> Self {
        ProbabilityVector(vec![0.5; np])
    }

    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidArgument("probabilities must lie in [0, 1]"));
        }
        Ok(ProbabilityVector(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Applies [`update_probability`]. The result is clamped to `[0, 1]`: a
    /// punished Eigen choice at `p_i < η·ε` would otherwise go negative.
    pub fn update(&mut self, i: usize, outcome: OutcomeRecord, params: SelectorParams) {
        self.0[i] = update_probability(self.0[i], outcome, params).clamp(0.0, 1.0);
    }
}

/// `p_m`, the mean of the vector.
pub fn mean_probability(pv: &ProbabilityVector) -> f64 {
    pv.0.iter().sum::<f64>() / pv.0.len() as f64
}
