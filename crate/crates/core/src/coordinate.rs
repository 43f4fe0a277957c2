//! The Eigen coordinate system: a FIFO archive of evaluated offspring and the
//! rank-μ covariance update that turns it into an orthonormal basis.
//!
//! Weights use the normalized log-rank form
//! `ω_i = (ln(μ+½) − ln i) / Σ_j (ln(μ+½) − ln j)`, so they always sum to one.
//! There is no step size and no evolution path; the covariance is a running
//! convex combination of rank-μ estimates.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, OrthonormalBasis, SquareMatrix};

/// One evaluated offspring.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchiveEntry {
    pub position: Vec<f64>,
    pub fitness: f64,
}

/// Bounded FIFO store of recently evaluated offspring.
#[derive(Debug, Clone)]
pub struct Archive {
    entries: VecDeque<ArchiveEntry>,
    capacity: usize,
}

impl Archive {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidArgument("archive capacity must be positive"));
        }
        Ok(Archive {
            entries: VecDeque::with_capacity(capacity),
            capacity,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries from oldest to newest.
    pub fn iter(&self) -> impl Iterator<Item = &ArchiveEntry> {
        self.entries.iter()
    }

    /// Appends the batch in order, then evicts oldest entries down to capacity.
    pub fn push_batch<I: IntoIterator<Item = ArchiveEntry>>(&mut self, batch: I) {
        for entry in batch {
            debug_assert!(entry.fitness.is_finite());
            self.entries.push_back(entry);
        }
        while self.entries.len() > self.capacity {
            self.entries.pop_front();
        }
    }

    /// Drops everything and keeps only `batch` (truncated to the newest `capacity`).
    pub fn replace_with<I: IntoIterator<Item = ArchiveEntry>>(&mut self, batch: I) {
        self.entries.clear();
        self.push_batch(batch);
    }

    /// Number of selected solutions: half the current size, at least one.
    pub fn selection_size(&self) -> usize {
        (self.entries.len() / 2).max(1)
    }

    /// The `mu` best entries, ascending by fitness, older first on ties.
    pub fn best(&self, mu: usize) -> Vec<&ArchiveEntry> {
        let mut sorted: Vec<&ArchiveEntry> = self.entries.iter().collect();
        // Stable sort keeps insertion order among equal fitnesses.
        sorted.sort_by(|a, b| a.fitness.total_cmp(&b.fitness));
        sorted.truncate(mu);
        sorted
    }
}

/// Log-rank recombination weights for the `mu` best solutions.
pub fn compute_weights(mu: usize) -> Result<Vec<f64>> {
    if mu == 0 {
        return Err(Error::InvalidArgument("mu must be at least 1"));
    }
    let top = libm::log(mu as f64 + 0.5);
    let raw: Vec<f64> = (1..=mu).map(|i| top - libm::log(i as f64)).collect();
    let total: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|w| w / total).collect())
}

/// Variance effective selection mass `(Σ ω_i²)⁻¹`.
pub fn mu_eff(weights: &[f64]) -> f64 {
    1.0 / weights.iter().map(|w| w * w).sum::<f64>()
}

/// `c_μ = min(1, μ_eff / (3·D²))`.
pub fn learning_rate(mu_eff: f64, dim: usize) -> f64 {
    (mu_eff / (3.0 * (dim * dim) as f64)).min(1.0)
}

fn check_entry_dims(selected: &[&ArchiveEntry], dim: usize) -> Result<()> {
    selected.iter().try_for_each(|e| check_dim(dim, e.position.len()))
}

/// Weighted mean of the best half of the archive.
pub fn update_mean(archive: &Archive) -> Result<Vec<f64>> {
    if archive.is_empty() {
        return Err(Error::ContractViolation("mean of an empty archive"));
    }
    let selected = archive.best(archive.selection_size());
    let weights = compute_weights(selected.len())?;
    let dim = selected[0].position.len();
    check_entry_dims(&selected, dim)?;
    let mut m = vec![0.0; dim];
    for (entry, w) in selected.iter().zip(&weights) {
        for (mj, xj) in m.iter_mut().zip(&entry.position) {
            *mj += w * xj;
        }
    }
    Ok(m)
}

/// Rank-μ estimate `Σ ω_i (a_i − m)(a_i − m)ᵀ` around the previous mean.
pub fn estimate_rank_mu(archive: &Archive, previous_mean: &[f64]) -> Result<SquareMatrix> {
    if archive.is_empty() {
        return Err(Error::ContractViolation("rank-mu estimate of an empty archive"));
    }
    let dim = previous_mean.len();
    let selected = archive.best(archive.selection_size());
    check_entry_dims(&selected, dim)?;
    let weights = compute_weights(selected.len())?;
    let mut c = SquareMatrix::zeros(dim);
    let mut y = vec![0.0; dim];
    for (entry, w) in selected.iter().zip(&weights) {
        for j in 0..dim {
            y[j] = entry.position[j] - previous_mean[j];
        }
        c.add_outer(*w, &y)?;
    }
    Ok(c)
}

/// `(1 − c_μ)·C + c_μ·C_μ` with the clamped learning rate.
pub fn update_covariance(
    covariance: &SquareMatrix,
    rank_mu: &SquareMatrix,
    mu_eff: f64,
) -> Result<SquareMatrix> {
    check_dim(covariance.dim(), rank_mu.dim())?;
    let c_mu = learning_rate(mu_eff, covariance.dim());
    covariance.lincomb(1.0 - c_mu, rank_mu, c_mu)
}

/// State of the Eigen coordinate system.
#[derive(Debug, Clone)]
pub struct EigenFrame {
    pub covariance: SquareMatrix,
    pub basis: OrthonormalBasis,
    pub eigenvalues: Vec<f64>,
    pub mean: Vec<f64>,
    pub generation: u64,
}

impl EigenFrame {
    /// Generation-zero frame: `C = B = I` around the given mean.
    pub fn new(mean: Vec<f64>) -> Self {
        let dim = mean.len();
        EigenFrame {
            covariance: SquareMatrix::identity(dim),
            basis: OrthonormalBasis::identity(dim),
            eigenvalues: vec![1.0; dim],
            mean,
            generation: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Mean, rank-μ estimate against the stored mean, covariance blend,
    /// then a fresh eigendecomposition.
    pub fn refresh(&mut self, archive: &Archive) -> Result<()> {
        let new_mean = update_mean(archive)?;
        check_dim(self.dim(), new_mean.len())?;
        let rank_mu = estimate_rank_mu(archive, &self.mean)?;
        let weights = compute_weights(archive.selection_size())?;
        let blended = update_covariance(&self.covariance, &rank_mu, mu_eff(&weights))?;
        let covariance = linalg::symmetrize(&blended);
        let eig = linalg::symmetric_eigendecompose(&covariance)?;
        self.covariance = covariance;
        self.basis = eig.basis;
        self.eigenvalues = eig.eigenvalues;
        self.mean = new_mean;
        self.generation += 1;
        Ok(())
    }
}

/// Functional form of [`EigenFrame::refresh`].
pub fn refresh_frame(frame: &EigenFrame, archive: &Archive) -> Result<EigenFrame> {
    let mut next = frame.clone();
    next.refresh(archive)?;
    Ok(next)
}

fn sample_covariance<'a, I>(points: I, count: usize, dim: usize) -> Result<SquareMatrix>
where
    I: Iterator<Item = &'a [f64]> + Clone,
{
    let mut mean = vec![0.0; dim];
    for p in points.clone() {
        check_dim(dim, p.len())?;
        for (mj, pj) in mean.iter_mut().zip(p) {
            *mj += pj;
        }
    }
    mean.iter_mut().for_each(|m| *m /= count as f64);
    let mut c = SquareMatrix::zeros(dim);
    let mut y = vec![0.0; dim];
    let w = 1.0 / (count - 1) as f64;
    for p in points {
        for j in 0..dim {
            y[j] = p[j] - mean[j];
        }
        c.add_outer(w, &y)?;
    }
    Ok(c)
}

/// Unbiased sample covariance of the whole population.
pub fn estimate_covariance_whole_population<P: AsRef<[f64]>>(pop: &[P]) -> Result<SquareMatrix> {
    if pop.len() < 2 {
        return Err(Error::InvalidArgument("need at least two individuals"));
    }
    let dim = pop[0].as_ref().len();
    sample_covariance(pop.iter().map(|p| p.as_ref()), pop.len(), dim)
}

/// Unbiased sample covariance of the `max(2, round(ps·NP))` best individuals.
pub fn estimate_covariance_best_fraction<P: AsRef<[f64]>>(pop: &[(P, f64)], ps: f64) -> Result<SquareMatrix> {
    if pop.len() < 2 {
        return Err(Error::InvalidArgument("need at least two individuals"));
    }
    if !(ps > 0.0 && ps <= 1.0) {
        return Err(Error::InvalidArgument("ps must lie in (0, 1]"));
    }
    let take = (libm::round(ps * pop.len() as f64) as usize).clamp(2, pop.len());
    let mut order: Vec<usize> = (0..pop.len()).collect();
    order.sort_by(|&a, &b| pop[a].1.total_cmp(&pop[b].1));
    order.truncate(take);
    let dim = pop[0].0.as_ref().len();
    sample_covariance(order.iter().map(|&i| pop[i].0.as_ref()), take, dim)
}
