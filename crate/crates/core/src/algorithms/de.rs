use alloc::collections::VecDeque;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Cauchy, Distribution, Normal};

use super::{FamilyParams, Offspring};
use crate::error::Result;
use crate::linalg::OrthonormalBasis;
use crate::operators::{
    binomial_crossover_eigen, binomial_crossover_original, de_mutate, make_crossover_mask, repair_bounds,
    DeIndividual, MutationContext, MutationStrategy, RepairMode, SearchBounds,
};
use crate::selector::{classify_outcome_de, CoordinateSystem};

/// Retries before a truncated parameter draw falls back to clamping.
const MAX_REDRAWS: usize = 16;

const SADE_POOL: [MutationStrategy; 4] = [
    MutationStrategy::Rand1,
    MutationStrategy::RandToBest2,
    MutationStrategy::Rand2,
    MutationStrategy::CurrentToRand1,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeParameters {
    pub f: f64,
    pub cr: f64,
}

/// `ΣF² / ΣF`; `None` for an empty slice.
pub fn lehmer_mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let sum: f64 = values.iter().sum();
    let sq: f64 = values.iter().map(|v| v * v).sum();
    Some(sq / sum)
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

#[derive(Default)]
struct SadeRecord {
    success: [usize; 4],
    failure: [usize; 4],
    cr: [Vec<f64>; 4],
}

struct SadeState {
    learning_period: usize,
    completed: usize,
    history: VecDeque<SadeRecord>,
    probabilities: [f64; 4],
    cr_medians: [f64; 4],
}

impl SadeState {
    fn refresh(&mut self) {
        if self.completed < self.learning_period {
            self.probabilities = [0.25; 4];
        } else {
            let mut s = [0.0; 4];
            for (k, sk) in s.iter_mut().enumerate() {
                let ns: usize = self.history.iter().map(|r| r.success[k]).sum();
                let nf: usize = self.history.iter().map(|r| r.failure[k]).sum();
                let rate = if ns + nf == 0 {
                    0.0
                } else {
                    ns as f64 / (ns + nf) as f64
                };
                *sk = rate + 0.01;
            }
            let total: f64 = s.iter().sum();
            for (p, sk) in self.probabilities.iter_mut().zip(s) {
                *p = sk / total;
            }
        }
        for k in 0..4 {
            let mut crs: Vec<f64> = self
                .history
                .iter()
                .flat_map(|r| r.cr[k].iter().copied())
                .collect();
            self.cr_medians[k] = if crs.is_empty() { 0.5 } else { median(&mut crs) };
        }
    }

    fn pick_strategy(&self, u: f64) -> usize {
        let mut acc = 0.0;
        for (k, p) in self.probabilities.iter().enumerate() {
            acc += p;
            if u < acc {
                return k;
            }
        }
        3
    }
}

struct JadeState {
    mu_f: f64,
    mu_cr: f64,
    c: f64,
    p_frac: f64,
    archive: Vec<Vec<f64>>,
    capacity: usize,
}

enum Adaptation {
    Jde { tau1: f64, tau2: f64 },
    Sade(SadeState),
    Jade(JadeState),
}

struct Pending {
    params: DeParameters,
    strategy: usize,
}

pub(super) struct DePopulation {
    pub individuals: Vec<DeIndividual>,
    adaptation: Adaptation,
    positions: Vec<Vec<f64>>,
    best: usize,
    pbest_pool: Vec<usize>,
    pending: Vec<Pending>,
}

impl DePopulation {
    pub fn init<R: Rng + ?Sized>(
        np: usize,
        params: FamilyParams,
        bounds: &SearchBounds,
        rng: &mut R,
        eval: &mut dyn FnMut(&[f64]) -> Result<f64>,
    ) -> Result<Self> {
        let adaptation = match params {
            FamilyParams::Jde { tau1, tau2 } => Adaptation::Jde { tau1, tau2 },
            FamilyParams::Sade { learning_period } => Adaptation::Sade(SadeState {
                learning_period,
                completed: 0,
                history: VecDeque::new(),
                probabilities: [0.25; 4],
                cr_medians: [0.5; 4],
            }),
            FamilyParams::Jade {
                p_frac,
                c,
                archive_factor,
            } => Adaptation::Jade(JadeState {
                mu_f: 0.5,
                mu_cr: 0.5,
                c,
                p_frac,
                archive: Vec::new(),
                capacity: libm::round(archive_factor * np as f64) as usize,
            }),
            _ => unreachable!("DE population built for a PSO family"),
        };
        let positions: Vec<Vec<f64>> = (0..np).map(|_| bounds.sample(rng)).collect();
        let mut individuals = Vec::with_capacity(np);
        for position in positions {
            let fitness = eval(&position)?;
            individuals.push(DeIndividual {
                position,
                fitness,
                f: 0.5,
                cr: 0.9,
            });
        }
        Ok(DePopulation {
            individuals,
            adaptation,
            positions: Vec::new(),
            best: 0,
            pbest_pool: Vec::new(),
            pending: Vec::new(),
        })
    }

    pub fn best(&self) -> (Vec<f64>, f64) {
        let b = self.best_index();
        (self.individuals[b].position.clone(), self.individuals[b].fitness)
    }

    fn best_index(&self) -> usize {
        let mut b = 0;
        for (i, ind) in self.individuals.iter().enumerate() {
            if ind.fitness < self.individuals[b].fitness {
                b = i;
            }
        }
        b
    }

    pub fn parameters(&self) -> Vec<DeParameters> {
        self.individuals
            .iter()
            .map(|i| DeParameters { f: i.f, cr: i.cr })
            .collect()
    }

    pub fn external_archive_len(&self) -> usize {
        match &self.adaptation {
            Adaptation::Jade(j) => j.archive.len(),
            _ => 0,
        }
    }

    pub fn begin_generation(&mut self, _generation: u64) {
        self.positions = self.individuals.iter().map(|i| i.position.clone()).collect();
        self.best = self.best_index();
        self.pending.clear();
        match &mut self.adaptation {
            Adaptation::Jade(j) => {
                let np = self.individuals.len();
                let top = (libm::round(j.p_frac * np as f64) as usize).clamp(1, np);
                let mut order: Vec<usize> = (0..np).collect();
                order.sort_by(|&a, &b| {
                    self.individuals[a]
                        .fitness
                        .total_cmp(&self.individuals[b].fitness)
                });
                order.truncate(top);
                self.pbest_pool = order;
            }
            Adaptation::Sade(s) => s.refresh(),
            Adaptation::Jde { .. } => {}
        }
    }

    fn draw_parameters<R: Rng + ?Sized>(&self, i: usize, rng: &mut R) -> (usize, DeParameters) {
        match &self.adaptation {
            Adaptation::Jde { tau1, tau2 } => {
                let current = &self.individuals[i];
                let f = if rng.random::<f64>() < *tau1 {
                    0.1 + 0.8 * rng.random::<f64>()
                } else {
                    current.f
                };
                let cr = if rng.random::<f64>() < *tau2 {
                    rng.random::<f64>()
                } else {
                    current.cr
                };
                (0, DeParameters { f, cr })
            }
            Adaptation::Jade(j) => {
                let cr_dist = Normal::new(j.mu_cr, 0.1).expect("positive sd");
                let cr = cr_dist.sample(rng).clamp(0.0, 1.0);
                let f_dist = Cauchy::new(j.mu_f, 0.1).expect("positive scale");
                let mut f = 0.0;
                for _ in 0..64 {
                    f = f_dist.sample(rng);
                    if f > 0.0 {
                        break;
                    }
                }
                let f = if f > 0.0 {
                    f.min(1.0)
                } else {
                    j.mu_f.clamp(0.01, 1.0)
                };
                (0, DeParameters { f, cr })
            }
            Adaptation::Sade(s) => {
                let k = s.pick_strategy(rng.random());
                let f_dist = Normal::new(0.5, 0.3).expect("positive sd");
                let f = truncated(|| f_dist.sample(rng), |v| v > 0.0 && v <= 2.0).clamp(0.01, 2.0);
                let cr_dist = Normal::new(s.cr_medians[k], 0.1).expect("positive sd");
                let cr = truncated(|| cr_dist.sample(rng), |v| (0.0..=1.0).contains(&v)).clamp(0.0, 1.0);
                (k, DeParameters { f, cr })
            }
        }
    }

    fn strategy(&self, k: usize) -> MutationStrategy {
        match self.adaptation {
            Adaptation::Jde { .. } => MutationStrategy::Rand1,
            Adaptation::Jade(_) => MutationStrategy::CurrentToPBest1,
            Adaptation::Sade(_) => SADE_POOL[k],
        }
    }

    /// Parameters, mutation, crossover mask, crossover in the chosen frame,
    /// then midpoint repair towards the target.
    pub fn offspring<R: Rng + ?Sized>(
        &mut self,
        i: usize,
        system: CoordinateSystem,
        basis: &OrthonormalBasis,
        bounds: &SearchBounds,
        rng: &mut R,
    ) -> Result<Offspring> {
        let (k, params) = self.draw_parameters(i, rng);
        let strategy = self.strategy(k);
        let archive: &[Vec<f64>] = match &self.adaptation {
            Adaptation::Jade(j) => &j.archive,
            _ => &[],
        };
        let ctx = MutationContext {
            population: &self.positions,
            best: self.best,
            pbest_pool: &self.pbest_pool,
            external_archive: archive,
        };
        let mutant = de_mutate(strategy, &ctx, i, params.f, rng)?;
        let target = &self.positions[i];
        let (trial, system) = if strategy == MutationStrategy::CurrentToRand1 {
            (mutant, None)
        } else {
            let mask = make_crossover_mask(params.cr, target.len(), rng)?;
            let trial = match system {
                CoordinateSystem::Original => binomial_crossover_original(target, &mutant, &mask)?,
                CoordinateSystem::Eigen => binomial_crossover_eigen(target, &mutant, &mask, basis)?,
            };
            (trial, Some(system))
        };
        let position = repair_bounds(&trial, target, bounds, RepairMode::MidpointToParent)?;
        self.pending.push(Pending { params, strategy: k });
        Ok(Offspring { position, system })
    }

    /// One-to-one selection plus the family's success bookkeeping.
    pub fn absorb<R: Rng + ?Sized>(
        &mut self,
        offspring: &[Offspring],
        fitness: &[f64],
        rng: &mut R,
    ) -> Vec<bool> {
        let mut improved = Vec::with_capacity(offspring.len());
        let mut success_f = Vec::new();
        let mut success_cr = Vec::new();
        let mut record = SadeRecord::default();
        for (i, (child, &f)) in offspring.iter().zip(fitness).enumerate() {
            let pending = &self.pending[i];
            let target = &mut self.individuals[i];
            let better = classify_outcome_de(f, target.fitness);
            improved.push(better);
            match &mut self.adaptation {
                Adaptation::Jade(j) => {
                    if better {
                        if j.capacity > 0 {
                            j.archive.push(target.position.clone());
                        }
                        success_f.push(pending.params.f);
                        success_cr.push(pending.params.cr);
                    }
                }
                Adaptation::Sade(_) => {
                    let k = pending.strategy;
                    if better {
                        record.success[k] += 1;
                        record.cr[k].push(pending.params.cr);
                    } else {
                        record.failure[k] += 1;
                    }
                }
                Adaptation::Jde { .. } => {}
            }
            let trial = DeIndividual {
                position: child.position.clone(),
                fitness: f,
                f: pending.params.f,
                cr: pending.params.cr,
            };
            let survivor = crate::operators::de_select(core::mem::replace(target, trial.clone()), trial);
            *target = survivor;
        }
        match &mut self.adaptation {
            Adaptation::Jade(j) => {
                while j.archive.len() > j.capacity {
                    let k = rng.random_range(0..j.archive.len());
                    j.archive.swap_remove(k);
                }
                if let Some(lm) = lehmer_mean(&success_f) {
                    j.mu_f = (1.0 - j.c) * j.mu_f + j.c * lm;
                    let mean_cr = success_cr.iter().sum::<f64>() / success_cr.len() as f64;
                    j.mu_cr = (1.0 - j.c) * j.mu_cr + j.c * mean_cr;
                }
            }
            Adaptation::Sade(s) => {
                s.history.push_back(record);
                while s.history.len() > s.learning_period {
                    s.history.pop_front();
                }
                s.completed += 1;
            }
            Adaptation::Jde { .. } => {}
        }
        improved
    }

    #[cfg(test)]
    pub(super) fn jade_means(&self) -> Option<(f64, f64)> {
        match &self.adaptation {
            Adaptation::Jade(j) => Some((j.mu_f, j.mu_cr)),
            _ => None,
        }
    }

    #[cfg(test)]
    pub(super) fn sade_probabilities(&self) -> Option<[f64; 4]> {
        match &self.adaptation {
            Adaptation::Sade(s) => Some(s.probabilities),
            _ => None,
        }
    }
}

fn truncated(mut draw: impl FnMut() -> f64, accept: impl Fn(f64) -> bool) -> f64 {
    let mut v = draw();
    for _ in 1..MAX_REDRAWS {
        if accept(v) {
            break;
        }
        v = draw();
    }
    v
}
