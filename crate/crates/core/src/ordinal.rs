//! Bandt-Pompe symbolization.
//!
//! A series is cut into `n = N - (d - 1) tau` overlapping windows of `d`
//! values spaced `tau` apart. Each window maps to the permutation of
//! `0..d` that sorts it ascending, equal values keeping their order of
//! appearance. Permutations are stored by Lehmer-code rank in `[0, d!)`,
//! which coincides with their lexicographic index.

use rayon::prelude::*;

use crate::dynamics::TimeSeries;
use crate::error::{Error, Result};

/// Largest supported embedding dimension; `10!` pattern slots.
pub const MAX_DIMENSION: usize = 10;

/// Windows per pattern below which the distribution is poorly sampled.
const ADVISORY_SAMPLES_PER_PATTERN: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrdinalConfig {
    pub d: usize,
    pub tau: usize,
}

impl Default for OrdinalConfig {
    fn default() -> Self {
        OrdinalConfig { d: 5, tau: 1 }
    }
}

impl OrdinalConfig {
    pub fn new(d: usize, tau: usize) -> Result<Self> {
        let cfg = OrdinalConfig { d, tau };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=MAX_DIMENSION).contains(&self.d) {
            return Err(Error::Config(format!(
                "embedding dimension d must be in 2..={MAX_DIMENSION}, got {}",
                self.d
            )));
        }
        if self.tau < 1 {
            return Err(Error::Config("embedding delay tau must be >= 1".into()));
        }
        Ok(())
    }

    /// `d!`, the number of distinct patterns.
    pub fn n_patterns(&self) -> usize {
        factorial(self.d)
    }

    /// Minimum series length yielding one window.
    pub fn min_len(&self) -> usize {
        (self.d - 1) * self.tau + 1
    }

    /// Number of windows cut from a series of length `n`.
    pub fn n_windows(&self, n: usize) -> usize {
        n.saturating_sub((self.d - 1) * self.tau)
    }
}

pub fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// An ordinal pattern, identified by its Lehmer-code rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pattern {
    pub rank: usize,
}

impl Pattern {
    /// Ranks a permutation of `0..perm.len()`.
    pub fn from_permutation(perm: &[usize]) -> Pattern {
        let d = perm.len();
        let mut rank = 0;
        for i in 0..d {
            let smaller_after = perm[i + 1..].iter().filter(|&&r| r < perm[i]).count();
            rank = rank * (d - i) + smaller_after;
        }
        Pattern { rank }
    }

    /// The permutation of `0..d` this rank stands for.
    pub fn permutation(&self, d: usize) -> Vec<usize> {
        let mut digits = vec![0; d];
        let mut r = self.rank;
        for i in (0..d).rev() {
            let base = d - i;
            digits[i] = r % base;
            r /= base;
        }
        let mut pool: Vec<usize> = (0..d).collect();
        digits.into_iter().map(|k| pool.remove(k)).collect()
    }
}

/// Overlapping windows `(x_p, x_{p+tau}, ..., x_{p+(d-1)tau})`.
pub fn partitions(series: &TimeSeries, cfg: &OrdinalConfig) -> Result<Vec<Vec<f64>>> {
    cfg.validate()?;
    check_len(series.len(), cfg)?;
    let x = series.values();
    Ok((0..cfg.n_windows(x.len()))
        .map(|p| (0..cfg.d).map(|k| x[p + k * cfg.tau]).collect())
        .collect())
}

fn check_len(n: usize, cfg: &OrdinalConfig) -> Result<()> {
    if n < cfg.min_len() {
        return Err(Error::SeriesTooShort {
            required: cfg.min_len(),
            actual: n,
        });
    }
    Ok(())
}

/// Pattern of a single window; ties keep order of appearance.
pub fn pattern_of(window: &[f64]) -> Result<Pattern> {
    if window.len() < 2 || window.len() > MAX_DIMENSION {
        return Err(Error::Data(format!(
            "window length must be in 2..={MAX_DIMENSION}, got {}",
            window.len()
        )));
    }
    if let Some(v) = window.iter().find(|v| !v.is_finite()) {
        return Err(Error::Data(format!("non-finite value {v} in window")));
    }
    let mut idx = [0usize; MAX_DIMENSION];
    Ok(rank_window(window, &mut idx[..window.len()]))
}

/// Ranks finite values; `idx` is scratch space of the window's length.
fn rank_window(window: &[f64], idx: &mut [usize]) -> Pattern {
    for (i, slot) in idx.iter_mut().enumerate() {
        *slot = i;
    }
    // Insertion sort is stable and fast for d <= 10.
    for i in 1..idx.len() {
        let cur = idx[i];
        let mut j = i;
        while j > 0 && window[idx[j - 1]] > window[cur] {
            idx[j] = idx[j - 1];
            j -= 1;
        }
        idx[j] = cur;
    }
    Pattern::from_permutation(idx)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrdinalDistribution {
    pub d: usize,
    pub tau: usize,
    /// Number of windows tallied.
    pub n: usize,
    /// Tallies indexed by pattern rank; length `d!`.
    pub counts: Vec<u64>,
}

impl OrdinalDistribution {
    pub fn empty(cfg: &OrdinalConfig) -> Self {
        OrdinalDistribution {
            d: cfg.d,
            tau: cfg.tau,
            n: 0,
            counts: vec![0; cfg.n_patterns()],
        }
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let n = self.n as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    /// Patterns that occur at least once.
    pub fn observed(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    /// Adds the tallies of another distribution over the same `(d, tau)`,
    /// e.g. one computed on a different chunk of windows.
    pub fn merge(&mut self, other: &OrdinalDistribution) -> Result<()> {
        if (self.d, self.tau) != (other.d, other.tau) {
            return Err(Error::Validation(format!(
                "cannot merge distributions with (d, tau) = ({}, {}) and ({}, {})",
                self.d, self.tau, other.d, other.tau
            )));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.n += other.n;
        Ok(())
    }
}

pub fn ordinal_distribution(
    series: &TimeSeries,
    cfg: &OrdinalConfig,
) -> Result<OrdinalDistribution> {
    cfg.validate()?;
    check_len(series.len(), cfg)?;
    let n = cfg.n_windows(series.len());
    if n < ADVISORY_SAMPLES_PER_PATTERN * cfg.n_patterns() {
        log::warn!(
            "{n} windows for {} patterns; the distribution is undersampled (want N >> d!)",
            cfg.n_patterns()
        );
    }
    Ok(tally_windows(series.values(), cfg, 0..n))
}

/// Same tallies as [`ordinal_distribution`], computed on `chunks` disjoint
/// ranges of windows in parallel and merged.
pub fn ordinal_distribution_chunked(
    series: &TimeSeries,
    cfg: &OrdinalConfig,
    chunks: usize,
) -> Result<OrdinalDistribution> {
    cfg.validate()?;
    check_len(series.len(), cfg)?;
    let n = cfg.n_windows(series.len());
    let chunks = chunks.clamp(1, n);
    let size = n.div_ceil(chunks);
    let parts: Vec<OrdinalDistribution> = (0..chunks)
        .into_par_iter()
        .map(|c| tally_windows(series.values(), cfg, c * size..((c + 1) * size).min(n)))
        .collect();
    let mut total = OrdinalDistribution::empty(cfg);
    for part in &parts {
        total.merge(part)?;
    }
    Ok(total)
}

/// Tallies the windows starting at the given indices. Windows must fit in
/// `x`.
fn tally_windows(
    x: &[f64],
    cfg: &OrdinalConfig,
    starts: std::ops::Range<usize>,
) -> OrdinalDistribution {
    let mut dist = OrdinalDistribution::empty(cfg);
    let mut window = [0.0; MAX_DIMENSION];
    let mut idx = [0usize; MAX_DIMENSION];
    for p in starts {
        for k in 0..cfg.d {
            window[k] = x[p + k * cfg.tau];
        }
        let pat = rank_window(&window[..cfg.d], &mut idx[..cfg.d]);
        dist.counts[pat.rank] += 1;
        dist.n += 1;
    }
    dist
}
