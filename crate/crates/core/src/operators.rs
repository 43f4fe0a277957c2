//! PSO and DE operators in the original frame and in an Eigen frame.
//!
//! The Eigen-frame variants replace every diagonal random matrix `W` of the
//! original operator by `B·W·Bᵀ`; coefficient terms (inertia, mutation) are
//! coordinate-free and left untouched.

use alloc::vec::Vec;
use rand::Rng;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{eigen_transform, OrthonormalBasis};

/// Box constraints `lower < upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchBounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl SearchBounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_dim(lower.len(), upper.len())?;
        if lower.is_empty() {
            return Err(Error::InvalidArgument("bounds need at least one dimension"));
        }
        let ok = lower
            .iter()
            .zip(&upper)
            .all(|(l, u)| l.is_finite() && u.is_finite() && l < u);
        if !ok {
            return Err(Error::InvalidArgument("bounds must be finite with lower < upper"));
        }
        Ok(SearchBounds { lower, upper })
    }

    /// `[lo, hi]^dim`.
    pub fn uniform(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(alloc::vec![lo; dim], alloc::vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| *l <= *v && *v <= *u)
    }

    /// A uniform point in the box, one draw per coordinate in index order.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| l + rng.random::<f64>() * (u - l))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub pbest_position: Vec<f64>,
    pub pbest_fitness: f64,
    pub fitness: f64,
}

impl Particle {
    /// Records a new evaluation; returns whether the personal best improved.
    pub fn record(&mut self, fitness: f64) -> bool {
        self.fitness = fitness;
        if fitness < self.pbest_fitness {
            self.pbest_fitness = fitness;
            self.pbest_position.clone_from(&self.position);
            true
        } else {
            false
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VelocityScheme {
    /// `v' = w·v + …`
    InertiaWeight(f64),
    /// `v' = χ·[v + …]`
    Constriction(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsoCoefficients {
    pub scheme: VelocityScheme,
    pub c1: f64,
    pub c2: f64,
}

/// Constriction factor `χ = 2 / |2 − φ − √(φ² − 4φ)|` with `φ = c1 + c2 > 4`.
pub fn constriction_factor(c1: f64, c2: f64) -> Result<f64> {
    let phi = c1 + c2;
    if phi <= 4.0 {
        return Err(Error::InvalidArgument("constriction needs c1 + c2 > 4"));
    }
    Ok(2.0 / (2.0 - phi - libm::sqrt(phi * phi - 4.0 * phi)).abs())
}

/// Linear inertia schedule from 0.9 down to 0.4 over the budget.
pub fn inertia_weight(fes_used: u64, fes_max: u64) -> f64 {
    let frac = if fes_max == 0 {
        1.0
    } else {
        (fes_used as f64 / fes_max as f64).min(1.0)
    };
    0.9 - 0.5 * frac
}

/// Per-coordinate velocity limit `fraction·(ub − lb)`.
pub fn velocity_limit(bounds: &SearchBounds, fraction: f64) -> Vec<f64> {
    bounds
        .lower
        .iter()
        .zip(&bounds.upper)
        .map(|(l, u)| fraction * (u - l))
        .collect()
}

fn combine_velocity(
    particle: &Particle,
    coeffs: &PsoCoefficients,
    cognitive: &[f64],
    social: &[f64],
    limit: Option<&[f64]>,
) -> Vec<f64> {
    let mut v: Vec<f64> = match coeffs.scheme {
        VelocityScheme::InertiaWeight(w) => (0..cognitive.len())
            .map(|j| w * particle.velocity[j] + coeffs.c1 * cognitive[j] + coeffs.c2 * social[j])
            .collect(),
        VelocityScheme::Constriction(chi) => (0..cognitive.len())
            .map(|j| chi * (particle.velocity[j] + coeffs.c1 * cognitive[j] + coeffs.c2 * social[j]))
            .collect(),
    };
    if let Some(limit) = limit {
        for (vj, lj) in v.iter_mut().zip(limit) {
            *vj = vj.clamp(-lj, *lj);
        }
    }
    v
}

fn check_particle(particle: &Particle, gbest: &[f64], r1: &[f64], r2: &[f64]) -> Result<usize> {
    let d = particle.position.len();
    check_dim(d, particle.velocity.len())?;
    check_dim(d, particle.pbest_position.len())?;
    check_dim(d, gbest.len())?;
    check_dim(d, r1.len())?;
    check_dim(d, r2.len())?;
    Ok(d)
}

fn differences(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Velocity update in the original frame, optionally clamped to `±limit`.
pub fn pso_velocity_original(
    particle: &Particle,
    gbest: &[f64],
    coeffs: &PsoCoefficients,
    r1: &[f64],
    r2: &[f64],
    limit: Option<&[f64]>,
) -> Result<Vec<f64>> {
    check_particle(particle, gbest, r1, r2)?;
    let cog = differences(&particle.pbest_position, &particle.position);
    let soc = differences(gbest, &particle.position);
    let cognitive: Vec<f64> = r1.iter().zip(&cog).map(|(r, d)| r * d).collect();
    let social: Vec<f64> = r2.iter().zip(&soc).map(|(r, d)| r * d).collect();
    Ok(combine_velocity(particle, coeffs, &cognitive, &social, limit))
}

/// Velocity update with `R_k` replaced by `B·R_k·Bᵀ`.
pub fn pso_velocity_eigen(
    particle: &Particle,
    gbest: &[f64],
    coeffs: &PsoCoefficients,
    r1: &[f64],
    r2: &[f64],
    basis: &OrthonormalBasis,
    limit: Option<&[f64]>,
) -> Result<Vec<f64>> {
    let d = check_particle(particle, gbest, r1, r2)?;
    check_dim(d, basis.dim())?;
    let cog = differences(&particle.pbest_position, &particle.position);
    let soc = differences(gbest, &particle.position);
    let cognitive = eigen_transform(r1, basis, &cog)?;
    let social = eigen_transform(r2, basis, &soc)?;
    Ok(combine_velocity(particle, coeffs, &cognitive, &social, limit))
}

/// `x' = x + v'` followed by clamping; velocity components that hit a bound
/// are zeroed.
pub fn pso_position_update(
    position: &[f64],
    velocity: &mut [f64],
    bounds: &SearchBounds,
) -> Result<Vec<f64>> {
    check_dim(position.len(), velocity.len())?;
    check_dim(bounds.dim(), position.len())?;
    let raw: Vec<f64> = position.iter().zip(velocity.iter()).map(|(x, v)| x + v).collect();
    let repaired = repair_bounds(&raw, position, bounds, RepairMode::ClampZeroVelocity)?;
    for j in 0..raw.len() {
        if repaired[j] != raw[j] {
            velocity[j] = 0.0;
        }
    }
    Ok(repaired)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepairMode {
    /// Clamp to the violated bound (PSO; the caller zeroes the velocity).
    ClampZeroVelocity,
    /// Midpoint between the parent and the violated bound (DE).
    MidpointToParent,
}

pub fn repair_bounds(x: &[f64], parent: &[f64], bounds: &SearchBounds, mode: RepairMode) -> Result<Vec<f64>> {
    check_dim(bounds.dim(), x.len())?;
    check_dim(bounds.dim(), parent.len())?;
    Ok((0..x.len())
        .map(|j| {
            let (lb, ub) = (bounds.lower[j], bounds.upper[j]);
            let v = x[j];
            if v >= lb && v <= ub {
                return v;
            }
            let below = !(v >= lb) && !(v > ub);
            match (mode, below) {
                (RepairMode::ClampZeroVelocity, true) => lb,
                (RepairMode::ClampZeroVelocity, false) => ub,
                (RepairMode::MidpointToParent, true) => 0.5 * (parent[j] + lb),
                (RepairMode::MidpointToParent, false) => 0.5 * (parent[j] + ub),
            }
        })
        .collect())
}

/// DE individual with jDE self-adaptive parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct DeIndividual {
    pub position: Vec<f64>,
    pub fitness: f64,
    pub f: f64,
    pub cr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MutationStrategy {
    /// `x_r1 + F(x_r2 − x_r3)`
    Rand1,
    /// `x_r1 + F(x_r2 − x_r3) + F(x_r4 − x_r5)`
    Rand2,
    /// `x_i + F(x_best − x_i) + F(x_r1 − x_r2)`
    CurrentToBest1,
    /// `x_r1 + F(x_best − x_r1) + F(x_r2 − x_r3)`
    RandToBest1,
    /// `x_i + F(x_pbest − x_i) + F(x_r1 − x̃_r2)`, `x̃_r2` from population ∪ archive
    CurrentToPBest1,
    /// `x_i + F(x_best − x_i) + F(x_r1 − x_r2) + F(x_r3 − x_r4)` (SaDE's rand-to-best/2)
    RandToBest2,
    /// `x_i + K(x_r1 − x_i) + F(x_r2 − x_r3)`, `K ~ U[0,1)`; used without crossover
    CurrentToRand1,
}

impl MutationStrategy {
    /// Smallest population the strategy can draw its distinct indices from.
    pub fn min_population(self) -> usize {
        match self {
            MutationStrategy::CurrentToPBest1 => 3,
            MutationStrategy::CurrentToBest1 => 3,
            MutationStrategy::Rand1 | MutationStrategy::RandToBest1 => 4,
            MutationStrategy::CurrentToRand1 => 4,
            MutationStrategy::RandToBest2 => 5,
            MutationStrategy::Rand2 => 6,
        }
    }
}

/// Population-level inputs to [`de_mutate`].
#[derive(Debug, Clone, Copy)]
pub struct MutationContext<'a> {
    pub population: &'a [Vec<f64>],
    /// Index of the best individual.
    pub best: usize,
    /// Indices of the top `p·NP` individuals (current-to-pbest only).
    pub pbest_pool: &'a [usize],
    /// JADE's archive of replaced parents (current-to-pbest only).
    pub external_archive: &'a [Vec<f64>],
}

/// Draws an index in `0..n` not in `exclude`, by rejection.
pub fn sample_index_excluding<R: Rng + ?Sized>(rng: &mut R, n: usize, exclude: &[usize]) -> usize {
    loop {
        let r = rng.random_range(0..n);
        if !exclude.contains(&r) {
            return r;
        }
    }
}

/// Draws `count` mutually distinct indices in `0..n`, all different from `i`,
/// in order r1, r2, ….
pub fn sample_distinct<R: Rng + ?Sized>(rng: &mut R, n: usize, i: usize, count: usize) -> Vec<usize> {
    let mut taken = Vec::with_capacity(count + 1);
    taken.push(i);
    for _ in 0..count {
        let r = sample_index_excluding(rng, n, &taken);
        taken.push(r);
    }
    taken.remove(0);
    taken
}

pub fn de_mutate<R: Rng + ?Sized>(
    strategy: MutationStrategy,
    ctx: &MutationContext<'_>,
    i: usize,
    f: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let pop = ctx.population;
    let np = pop.len();
    if np < strategy.min_population() {
        return Err(Error::InvalidArgument(
            "population too small for mutation strategy",
        ));
    }
    if i >= np || ctx.best >= np {
        return Err(Error::InvalidArgument("individual index out of range"));
    }
    if !(f > 0.0) && f != 0.0 {
        return Err(Error::InvalidArgument("scale factor must be non-negative"));
    }
    let d = pop[i].len();
    let x = |k: usize| -> &[f64] { &pop[k] };
    let build = |g: &dyn Fn(usize) -> f64| -> Vec<f64> { (0..d).map(g).collect() };

    let v = match strategy {
        MutationStrategy::Rand1 => {
            let r = sample_distinct(rng, np, i, 3);
            let (a, b, c) = (x(r[0]), x(r[1]), x(r[2]));
            build(&|j| a[j] + f * (b[j] - c[j]))
        }
        MutationStrategy::Rand2 => {
            let r = sample_distinct(rng, np, i, 5);
            let (a, b, c, e, g) = (x(r[0]), x(r[1]), x(r[2]), x(r[3]), x(r[4]));
            build(&|j| a[j] + f * (b[j] - c[j]) + f * (e[j] - g[j]))
        }
        MutationStrategy::CurrentToBest1 => {
            let r = sample_distinct(rng, np, i, 2);
            let (xi, best, a, b) = (x(i), x(ctx.best), x(r[0]), x(r[1]));
            build(&|j| xi[j] + f * (best[j] - xi[j]) + f * (a[j] - b[j]))
        }
        MutationStrategy::RandToBest1 => {
            let r = sample_distinct(rng, np, i, 3);
            let (best, a, b, c) = (x(ctx.best), x(r[0]), x(r[1]), x(r[2]));
            build(&|j| a[j] + f * (best[j] - a[j]) + f * (b[j] - c[j]))
        }
        MutationStrategy::RandToBest2 => {
            let r = sample_distinct(rng, np, i, 4);
            let (xi, best) = (x(i), x(ctx.best));
            let (a, b, c, e) = (x(r[0]), x(r[1]), x(r[2]), x(r[3]));
            build(&|j| xi[j] + f * (best[j] - xi[j]) + f * (a[j] - b[j]) + f * (c[j] - e[j]))
        }
        MutationStrategy::CurrentToRand1 => {
            let k: f64 = rng.random();
            let r = sample_distinct(rng, np, i, 3);
            let (xi, a, b, c) = (x(i), x(r[0]), x(r[1]), x(r[2]));
            build(&|j| xi[j] + k * (a[j] - xi[j]) + f * (b[j] - c[j]))
        }
        MutationStrategy::CurrentToPBest1 => {
            if ctx.pbest_pool.is_empty() {
                return Err(Error::InvalidArgument("empty pbest pool"));
            }
            let pbest = ctx.pbest_pool[rng.random_range(0..ctx.pbest_pool.len())];
            let r1 = sample_index_excluding(rng, np, &[i]);
            let union = np + ctx.external_archive.len();
            let r2 = sample_index_excluding(rng, union, &[i, r1]);
            let x2: &[f64] = if r2 < np {
                x(r2)
            } else {
                &ctx.external_archive[r2 - np]
            };
            let (xi, xp, a) = (x(i), x(pbest), x(r1));
            build(&|j| xi[j] + f * (xp[j] - xi[j]) + f * (a[j] - x2[j]))
        }
    };
    Ok(v)
}

/// Binomial crossover selection flags; `forced_index` is always set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossoverMask {
    flags: Vec<bool>,
    forced_index: usize,
}

impl CrossoverMask {
    pub fn new(mut flags: Vec<bool>, forced_index: usize) -> Result<Self> {
        if forced_index >= flags.len() {
            return Err(Error::InvalidArgument("forced index out of range"));
        }
        flags[forced_index] = true;
        Ok(CrossoverMask { flags, forced_index })
    }

    /// All coordinates taken from the mutant.
    pub fn full(dim: usize) -> Self {
        CrossoverMask {
            flags: alloc::vec![true; dim],
            forced_index: 0,
        }
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    /// Zero-based.
    pub fn forced_index(&self) -> usize {
        self.forced_index
    }

    pub fn dim(&self) -> usize {
        self.flags.len()
    }

    /// The 0/1 diagonal of `C_r`.
    pub fn as_weights(&self) -> Vec<f64> {
        self.flags.iter().map(|&s| if s { 1.0 } else { 0.0 }).collect()
    }
}

/// Draws `j_rand` first, then one uniform per coordinate.
pub fn make_crossover_mask<R: Rng + ?Sized>(cr: f64, dim: usize, rng: &mut R) -> Result<CrossoverMask> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1"));
    }
    if !(0.0..=1.0).contains(&cr) {
        return Err(Error::InvalidArgument("CR must lie in [0, 1]"));
    }
    let forced = rng.random_range(0..dim);
    let flags = (0..dim).map(|_| rng.random::<f64>() <= cr).collect();
    CrossoverMask::new(flags, forced)
}

/// `u = x + C_r(v − x)`. Flagged coordinates equal `v_j` up to one rounding.
pub fn binomial_crossover_original(x: &[f64], v: &[f64], mask: &CrossoverMask) -> Result<Vec<f64>> {
    check_dim(x.len(), v.len())?;
    check_dim(x.len(), mask.dim())?;
    let s = mask.as_weights();
    Ok((0..x.len()).map(|j| x[j] + s[j] * (v[j] - x[j])).collect())
}

/// `u = x + B·C_r·Bᵀ(v − x)`.
pub fn binomial_crossover_eigen(
    x: &[f64],
    v: &[f64],
    mask: &CrossoverMask,
    basis: &OrthonormalBasis,
) -> Result<Vec<f64>> {
    check_dim(x.len(), v.len())?;
    check_dim(x.len(), mask.dim())?;
    let step = eigen_transform(&mask.as_weights(), basis, &differences(v, x))?;
    Ok(x.iter().zip(&step).map(|(a, b)| a + b).collect())
}

/// One-to-one survivor rule: the trial wins ties.
pub fn trial_survives(trial_fitness: f64, target_fitness: f64) -> bool {
    trial_fitness <= target_fitness
}

/// Returns the survivor, which keeps its own position, fitness and
/// self-adaptive parameters.
pub fn de_select(target: DeIndividual, trial: DeIndividual) -> DeIndividual {
    if trial_survives(trial.fitness, target.fitness) {
        trial
    } else {
        target
    }
}
