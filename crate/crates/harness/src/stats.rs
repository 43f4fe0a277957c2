//! Two-sample Wilcoxon rank-sum test and per-cell summaries.
//!
//! Ties get midranks. When `n1 + n2 <= EXACT_LIMIT` the p-value comes from
//! the exact permutation distribution of the rank sum, computed by dynamic
//! programming over doubled (hence integral) midranks. Larger samples use the
//! normal approximation with tie-corrected variance and a continuity
//! correction.

use std::fmt;

/// Largest combined sample size that gets the exact distribution.
pub const EXACT_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// The first sample has significantly smaller errors.
    Better,
    /// The first sample has significantly larger errors.
    Worse,
    Similar,
}

impl Verdict {
    pub fn symbol(self) -> &'static str {
        match self {
            Verdict::Better => "+",
            Verdict::Worse => "-",
            Verdict::Similar => "≈",
        }
    }

    pub fn flipped(self) -> Verdict {
        match self {
            Verdict::Better => Verdict::Worse,
            Verdict::Worse => Verdict::Better,
            Verdict::Similar => Verdict::Similar,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankSumTest {
    /// Rank sum of the first sample.
    pub w: f64,
    /// Two-sided p-value.
    pub p: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StatsError {
    TooFewSamples { n1: usize, n2: usize },
    NonFinite,
    BadAlpha(f64),
}

impl fmt::Display for StatsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatsError::TooFewSamples { n1, n2 } => {
                write!(
                    f,
                    "rank-sum test needs at least 3 values per sample, got {n1} and {n2}"
                )
            }
            StatsError::NonFinite => f.write_str("rank-sum test input contains a non-finite value"),
            StatsError::BadAlpha(a) => write!(f, "significance level {a} is outside (0, 1)"),
        }
    }
}

impl std::error::Error for StatsError {}

/// Midranks (1-based) of `values`, in input order.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + 1 + end) as f64 / 2.0;
        for &k in &order[start..end] {
            ranks[k] = rank;
        }
        start = end;
    }
    ranks
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Exact two-sided p-value: the probability, over all `C(N, n1)` equally
/// likely rank assignments, of a rank sum at least as far from its mean as
/// the observed one. Ranks are passed doubled.
fn exact_p(doubled: &[u64], n1: usize, observed: u64) -> f64 {
    let total: u64 = doubled.iter().sum();
    let max_sum = total as usize;
    // counts[k][s]: number of k-subsets with doubled rank sum s.
    let mut counts = vec![vec![0.0f64; max_sum + 1]; n1 + 1];
    counts[0][0] = 1.0;
    for (seen, &r) in doubled.iter().enumerate() {
        let r = r as usize;
        for k in (1..=n1.min(seen + 1)).rev() {
            let (lower, upper) = counts.split_at_mut(k);
            let (src, dst) = (&lower[k - 1], &mut upper[0]);
            for s in (r..=max_sum).rev() {
                dst[s] += src[s - r];
            }
        }
    }
    let n = doubled.len() as u64;
    // Mean of the doubled rank sum.
    let mean2 = n1 as u64 * (n + 1);
    let dev = observed.abs_diff(mean2);
    let mut extreme = 0.0;
    let mut all = 0.0;
    for (s, &c) in counts[n1].iter().enumerate() {
        all += c;
        if (s as u64).abs_diff(mean2) >= dev {
            extreme += c;
        }
    }
    extreme / all
}

fn normal_p(ranks: &[f64], n1: usize, w: f64) -> f64 {
    let n = ranks.len() as f64;
    let (n1f, n2f) = (n1 as f64, n - n1 as f64);
    let mean = n1f * (n + 1.0) / 2.0;
    let mut sorted = ranks.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut tie_sum = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        tie_sum += t * t * t - t;
        i = j;
    }
    let var = n1f * n2f / 12.0 * ((n + 1.0) - tie_sum / (n * (n - 1.0)));
    if var <= 0.0 {
        return 1.0;
    }
    let diff = ((w - mean).abs() - 0.5).max(0.0);
    let z = diff / var.sqrt();
    libm::erfc(z / std::f64::consts::SQRT_2).min(1.0)
}

/// Two-sided rank-sum test of `a` against `b` at level `alpha`. The verdict
/// is from `a`'s point of view: `+` when `a` has the smaller median error and
/// the difference is significant. Equal medians fall back to the rank sum.
pub fn wilcoxon_rank_sum(a: &[f64], b: &[f64], alpha: f64) -> Result<RankSumTest, StatsError> {
    if a.len() < 3 || b.len() < 3 {
        return Err(StatsError::TooFewSamples {
            n1: a.len(),
            n2: b.len(),
        });
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StatsError::BadAlpha(alpha));
    }
    let n1 = a.len();
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = midranks(&pooled);
    let w: f64 = ranks[..n1].iter().sum();
    let p = if pooled.len() <= EXACT_LIMIT {
        let doubled: Vec<u64> = ranks.iter().map(|r| (2.0 * r) as u64).collect();
        let observed: u64 = doubled[..n1].iter().sum();
        exact_p(&doubled, n1, observed)
    } else {
        normal_p(&ranks, n1, w)
    };
    let verdict = if p >= alpha {
        Verdict::Similar
    } else {
        let (ma, mb) = (median(a), median(b));
        let a_smaller = if ma != mb {
            ma < mb
        } else {
            w < n1 as f64 * (pooled.len() as f64 + 1.0) / 2.0
        };
        let a_larger = if ma != mb {
            ma > mb
        } else {
            w > n1 as f64 * (pooled.len() as f64 + 1.0) / 2.0
        };
        if a_smaller {
            Verdict::Better
        } else if a_larger {
            Verdict::Worse
        } else {
            Verdict::Similar
        }
    };
    Ok(RankSumTest { w, p, verdict })
}

/// Mean and sample standard deviation (divisor `n − 1`). A single value has
/// standard deviation 0. Returns `None` for an empty slice.
pub fn summarize(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return Some((mean, 0.0));
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    Some((mean, (ss / (n - 1.0)).sqrt()))
}
