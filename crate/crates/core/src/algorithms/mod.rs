//! Baseline evolutionary algorithms and the adaptive coordinate-system
//! wrapper around them.
//!
//! One [`Optimizer`] owns one run: population, Eigen frame, offspring
//! archive, probability vector, FE counter and RNG stream. Each call to
//! [`Optimizer::step`] performs one generation:
//!
//! 1. per individual, in index order: draw `u`, pick the frame, then draw the
//!    operator's own random numbers and build the offspring;
//! 2. evaluate the offspring (never past the budget);
//! 3. selection (DE) or pbest/gbest bookkeeping (PSO);
//! 4. push the offspring into the archive and refresh the Eigen frame;
//! 5. update the probability vector from the outcomes.

mod de;
mod pso;

use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};

use crate::coordinate::{Archive, ArchiveEntry, EigenFrame};
use crate::error::{Error, Result};
use crate::selector::{
    choose_system, mean_probability, CoordinateSystem, OutcomeRecord, ProbabilityVector, SelectorParams,
};
use crate::{Objective, RunRng};

pub use de::{lehmer_mean, DeParameters};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    PsoW,
    PsoCf,
    Jde,
    Sade,
    Jade,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::PsoW,
        Family::PsoCf,
        Family::Jde,
        Family::Sade,
        Family::Jade,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::PsoW => "pso-w",
            Family::PsoCf => "pso-cf",
            Family::Jde => "jde",
            Family::Sade => "sade",
            Family::Jade => "jade",
        }
    }

    pub fn from_name(name: &str) -> Option<Family> {
        Family::ALL.into_iter().find(|f| f.name() == name)
    }

    pub fn is_pso(self) -> bool {
        matches!(self, Family::PsoW | Family::PsoCf)
    }

    /// 40 for PSO up to 20-D (60 at 30-D reaches 2·D), 100 for DE.
    pub fn default_np(self, dim: usize) -> usize {
        if self.is_pso() {
            (2 * dim).max(40)
        } else {
            100
        }
    }
}

/// Per-family control parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilyParams {
    /// Inertia weight decreasing linearly from 0.9 to 0.4.
    PsoW {
        c1: f64,
        c2: f64,
        velocity_fraction: f64,
    },
    PsoCf {
        c1: f64,
        c2: f64,
        chi: f64,
        velocity_fraction: f64,
    },
    Jde {
        tau1: f64,
        tau2: f64,
    },
    Sade {
        learning_period: usize,
    },
    Jade {
        p_frac: f64,
        c: f64,
        archive_factor: f64,
    },
}

impl FamilyParams {
    pub fn defaults(family: Family) -> Self {
        match family {
            Family::PsoW => FamilyParams::PsoW {
                c1: 2.0,
                c2: 2.0,
                velocity_fraction: 0.5,
            },
            Family::PsoCf => FamilyParams::PsoCf {
                c1: 2.05,
                c2: 2.05,
                chi: 0.729,
                velocity_fraction: 0.5,
            },
            Family::Jde => FamilyParams::Jde { tau1: 0.1, tau2: 0.1 },
            Family::Sade => FamilyParams::Sade { learning_period: 50 },
            Family::Jade => FamilyParams::Jade {
                p_frac: 0.05,
                c: 0.1,
                archive_factor: 1.0,
            },
        }
    }

    pub fn family(&self) -> Family {
        match self {
            FamilyParams::PsoW { .. } => Family::PsoW,
            FamilyParams::PsoCf { .. } => Family::PsoCf,
            FamilyParams::Jde { .. } => Family::Jde,
            FamilyParams::Sade { .. } => Family::Sade,
            FamilyParams::Jade { .. } => Family::Jade,
        }
    }

    fn validate(&self) -> Result<()> {
        let prob = |v: f64| (0.0..=1.0).contains(&v);
        let ok = match *self {
            FamilyParams::PsoW {
                c1,
                c2,
                velocity_fraction,
            } => c1 >= 0.0 && c2 >= 0.0 && velocity_fraction > 0.0,
            FamilyParams::PsoCf {
                c1,
                c2,
                chi,
                velocity_fraction,
            } => c1 >= 0.0 && c2 >= 0.0 && chi > 0.0 && velocity_fraction > 0.0,
            FamilyParams::Jde { tau1, tau2 } => prob(tau1) && prob(tau2),
            FamilyParams::Sade { learning_period } => learning_period >= 1,
            FamilyParams::Jade {
                p_frac,
                c,
                archive_factor,
            } => p_frac > 0.0 && p_frac <= 1.0 && prob(c) && archive_factor >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument("family parameter out of range"))
        }
    }
}

/// A baseline EA with its population size and the coordinate-selection knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgorithmSpec {
    pub np: usize,
    pub params: FamilyParams,
    pub selector: SelectorParams,
    /// Offspring archive capacity as a multiple of `np`.
    pub archive_factor: f64,
}

impl AlgorithmSpec {
    pub fn new(family: Family, dim: usize) -> Self {
        AlgorithmSpec {
            np: family.default_np(dim),
            params: FamilyParams::defaults(family),
            selector: SelectorParams::default(),
            archive_factor: 3.0,
        }
    }

    pub fn with_np(mut self, np: usize) -> Self {
        self.np = np;
        self
    }

    pub fn family(&self) -> Family {
        self.params.family()
    }

    pub fn validate(&self) -> Result<()> {
        let min = if self.family().is_pso() { 2 } else { 6 };
        if self.np < min {
            return Err(Error::InvalidArgument(
                "population size too small for this family",
            ));
        }
        if !(self.archive_factor > 0.0) {
            return Err(Error::InvalidArgument("archive factor must be positive"));
        }
        SelectorParams::new(self.selector.epsilon, self.selector.eta)?;
        self.params.validate()
    }

    fn archive_capacity(&self) -> usize {
        (libm::round(self.archive_factor * self.np as f64) as usize).max(1)
    }
}

/// How the coordinate system is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AcosMode {
    /// Probability vector adapted from offspring outcomes.
    Adaptive,
    /// Every `p_i` pinned to the value; no adaptation.
    FixedP(f64),
    /// Adaptive, but the archive holds only the current generation's offspring.
    NoArchive,
    /// The plain EA: original frame only, no frame maintenance. Consumes the
    /// RNG exactly like `FixedP(0.0)`, so both produce identical runs.
    Baseline,
}

impl AcosMode {
    pub fn validate(&self) -> Result<()> {
        match self {
            AcosMode::FixedP(p) if !(0.0..=1.0).contains(p) => {
                Err(Error::InvalidArgument("fixed probability must lie in [0, 1]"))
            }
            _ => Ok(()),
        }
    }

    fn adapts(&self) -> bool {
        matches!(self, AcosMode::Adaptive | AcosMode::NoArchive)
    }
}

impl fmt::Display for AcosMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AcosMode::Adaptive => f.write_str("adaptive"),
            AcosMode::FixedP(p) => write!(f, "fixed-p{p}"),
            AcosMode::NoArchive => f.write_str("noarchive"),
            AcosMode::Baseline => f.write_str("baseline"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub generation: u64,
    pub fes: u64,
    pub best_fitness: f64,
    /// Mean Eigen-frame probability after this generation's update.
    pub p_mean: f64,
}

/// Number of offspring produced by each frame's operators.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OperatorCounters {
    pub eigen: u64,
    pub original: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub seed: u64,
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
    pub fes_used: u64,
    pub generations: u64,
    pub trace: Vec<TracePoint>,
    pub counters: OperatorCounters,
}

/// One offspring produced in step 1 of a generation.
struct Offspring {
    position: Vec<f64>,
    /// `None` when the operator has no coordinate-dependent part.
    system: Option<CoordinateSystem>,
}

enum Population {
    Swarm(pso::Swarm),
    De(de::DePopulation),
}

/// Owns the state of one run.
pub struct Optimizer<'a, O: Objective + ?Sized> {
    objective: &'a O,
    spec: AlgorithmSpec,
    mode: AcosMode,
    budget: u64,
    seed: u64,
    rng: RunRng,
    fes: u64,
    generation: u64,
    frame: EigenFrame,
    archive: Archive,
    probabilities: ProbabilityVector,
    population: Population,
    best_position: Vec<f64>,
    best_fitness: f64,
    counters: OperatorCounters,
    trace: Vec<TracePoint>,
}

impl<'a, O: Objective + ?Sized> Optimizer<'a, O> {
    /// Draws `m⁰`, initializes and evaluates the population.
    pub fn new(
        spec: AlgorithmSpec,
        mode: AcosMode,
        objective: &'a O,
        budget_fes: u64,
        seed: u64,
    ) -> Result<Self> {
        spec.validate()?;
        mode.validate()?;
        if objective.bounds().dim() != objective.dim() {
            return Err(Error::DimensionMismatch {
                expected: objective.dim(),
                found: objective.bounds().dim(),
            });
        }
        if budget_fes < spec.np as u64 {
            return Err(Error::InvalidArgument("budget must cover the initial population"));
        }
        let mut rng = RunRng::seed_from_u64(seed);
        let bounds = objective.bounds();
        let mean0 = bounds.sample(&mut rng);
        let frame = EigenFrame::new(mean0);

        let mut fes = 0;
        let mut eval = |x: &[f64]| evaluate(objective, x, &mut fes);
        let population =
            match spec.params {
                FamilyParams::PsoW { .. } | FamilyParams::PsoCf { .. } => Population::Swarm(
                    pso::Swarm::init(spec.np, spec.params, bounds, &mut rng, &mut eval)?,
                ),
                params => Population::De(de::DePopulation::init(
                    spec.np, params, bounds, &mut rng, &mut eval,
                )?),
            };
        let (best_position, best_fitness) = match &population {
            Population::Swarm(s) => (s.gbest_position.clone(), s.gbest_fitness),
            Population::De(d) => d.best(),
        };

        let mut opt = Optimizer {
            objective,
            spec,
            mode,
            budget: budget_fes,
            seed,
            rng,
            fes,
            generation: 0,
            frame,
            archive: Archive::new(spec.archive_capacity())?,
            probabilities: ProbabilityVector::new(spec.np),
            population,
            best_position,
            best_fitness,
            counters: OperatorCounters::default(),
            trace: Vec::new(),
        };
        opt.record_trace();
        Ok(opt)
    }

    pub fn is_exhausted(&self) -> bool {
        self.fes >= self.budget
    }

    pub fn fes_used(&self) -> u64 {
        self.fes
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn frame(&self) -> &EigenFrame {
        &self.frame
    }

    pub fn archive(&self) -> &Archive {
        &self.archive
    }

    pub fn probabilities(&self) -> &ProbabilityVector {
        &self.probabilities
    }

    pub fn counters(&self) -> OperatorCounters {
        self.counters
    }

    pub fn best(&self) -> (&[f64], f64) {
        (&self.best_position, self.best_fitness)
    }

    pub fn trace(&self) -> &[TracePoint] {
        &self.trace
    }

    /// Current DE control parameters per individual (empty for PSO).
    pub fn de_parameters(&self) -> Vec<DeParameters> {
        match &self.population {
            Population::De(d) => d.parameters(),
            Population::Swarm(_) => Vec::new(),
        }
    }

    /// Size of JADE's archive of replaced parents (0 for other families).
    pub fn external_archive_len(&self) -> usize {
        match &self.population {
            Population::De(d) => d.external_archive_len(),
            Population::Swarm(_) => 0,
        }
    }

    /// Current positions of the population.
    pub fn positions(&self) -> Vec<Vec<f64>> {
        match &self.population {
            Population::Swarm(s) => s.particles.iter().map(|p| p.position.clone()).collect(),
            Population::De(d) => d.individuals.iter().map(|p| p.position.clone()).collect(),
        }
    }

    fn p_effective(&self, i: usize) -> f64 {
        match self.mode {
            AcosMode::FixedP(p) => p,
            AcosMode::Baseline => 0.0,
            AcosMode::Adaptive | AcosMode::NoArchive => self.probabilities.get(i),
        }
    }

    fn p_mean(&self) -> f64 {
        match self.mode {
            AcosMode::FixedP(p) => p,
            AcosMode::Baseline => 0.0,
            _ => mean_probability(&self.probabilities),
        }
    }

    fn record_trace(&mut self) {
        self.trace.push(TracePoint {
            generation: self.generation,
            fes: self.fes,
            best_fitness: self.best_fitness,
            p_mean: self.p_mean(),
        });
    }

    /// Runs one generation. Does nothing once the budget is spent.
    pub fn step(&mut self) -> Result<()> {
        if self.is_exhausted() {
            return Ok(());
        }
        let count = (self.budget - self.fes).min(self.spec.np as u64) as usize;

        // Step 1: offspring, one individual at a time: the frame draw first,
        // then the operator's own draws.
        let bounds = self.objective.bounds();
        match &mut self.population {
            Population::Swarm(s) => s.begin_generation(self.fes, self.budget),
            Population::De(d) => d.begin_generation(self.generation),
        }
        let mut offspring = Vec::with_capacity(count);
        for i in 0..count {
            let p = self.p_effective(i);
            let u: f64 = self.rng.random();
            let system = choose_system(p, u);
            let basis = &self.frame.basis;
            let child = match &mut self.population {
                Population::Swarm(s) => s.offspring(i, system, basis, bounds, &mut self.rng)?,
                Population::De(d) => d.offspring(i, system, basis, bounds, &mut self.rng)?,
            };
            match child.system {
                Some(CoordinateSystem::Eigen) => self.counters.eigen += 1,
                Some(CoordinateSystem::Original) => self.counters.original += 1,
                None => {}
            }
            offspring.push(child);
        }

        // Step 2: evaluation.
        let mut fitness = Vec::with_capacity(count);
        for child in &offspring {
            fitness.push(evaluate(self.objective, &child.position, &mut self.fes)?);
        }

        // Step 3: selection / bookkeeping, returns per-offspring improvement.
        let improved = match &mut self.population {
            Population::Swarm(s) => s.absorb(&offspring, &fitness),
            Population::De(d) => d.absorb(&offspring, &fitness, &mut self.rng),
        };
        for (child, &f) in offspring.iter().zip(&fitness) {
            if f < self.best_fitness {
                self.best_fitness = f;
                self.best_position.clone_from(&child.position);
            }
        }

        // Step 4: archive and Eigen frame.
        if !matches!(self.mode, AcosMode::Baseline) {
            let batch = offspring.iter().zip(&fitness).map(|(c, &f)| ArchiveEntry {
                position: c.position.clone(),
                fitness: f,
            });
            if matches!(self.mode, AcosMode::NoArchive) {
                self.archive.replace_with(batch);
            } else {
                self.archive.push_batch(batch);
            }
            self.frame.refresh(&self.archive)?;
        }

        // Step 5: probability vector.
        if self.mode.adapts() {
            for (i, (child, &better)) in offspring.iter().zip(&improved).enumerate() {
                if let Some(system) = child.system {
                    let outcome = OutcomeRecord {
                        system,
                        improved: better,
                    };
                    self.probabilities.update(i, outcome, self.spec.selector);
                }
            }
        }

        self.generation += 1;
        self.record_trace();
        Ok(())
    }

    /// Steps until the budget is spent.
    pub fn run_to_completion(mut self) -> Result<RunResult> {
        while !self.is_exhausted() {
            self.step()?;
        }
        Ok(self.finish())
    }

    pub fn finish(self) -> RunResult {
        RunResult {
            seed: self.seed,
            best_position: self.best_position,
            best_fitness: self.best_fitness,
            fes_used: self.fes,
            generations: self.generation,
            trace: self.trace,
            counters: self.counters,
        }
    }
}

fn evaluate<O: Objective + ?Sized>(objective: &O, x: &[f64], fes: &mut u64) -> Result<f64> {
    *fes += 1;
    let f = objective.evaluate(x);
    if f.is_finite() {
        Ok(f)
    } else {
        Err(Error::EvaluationFailure { fes: *fes })
    }
}

/// Initializes and runs one seeded optimization to the end of its budget.
pub fn run<O: Objective + ?Sized>(
    spec: AlgorithmSpec,
    mode: AcosMode,
    objective: &O,
    budget_fes: u64,
    seed: u64,
) -> Result<RunResult> {
    Optimizer::new(spec, mode, objective, budget_fes, seed)?.run_to_completion()
}
