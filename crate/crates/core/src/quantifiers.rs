//! Information quantifiers of an ordinal distribution: Shannon entropy,
//! the LMC disequilibrium and complexity, and the Jensen-Shannon
//! divergence and complexity.
//!
//! Logarithms are natural unless a [`LogBase`] is given. Every reported
//! quantity except the raw entropy `S` is a ratio and does not depend on
//! the base. Zero probabilities contribute nothing (`0 ln 0 = 0`).

use serde::{Deserialize, Serialize};

use crate::dynamics::TimeSeries;
use crate::error::{Error, Result};
use crate::ordinal::{ordinal_distribution, OrdinalConfig, OrdinalDistribution};

/// How far a probability sum may stray from one before it is rejected.
const SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogBase {
    #[default]
    Natural,
    Two,
}

impl LogBase {
    fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Natural => x.ln(),
            LogBase::Two => x.log2(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector {
    probs: Vec<f64>,
}

impl ProbabilityVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::Validation(format!(
                "need at least two outcomes, got {}",
                probs.len()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Validation(format!("probability {p} outside [0, 1]")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::Validation(format!(
                "probabilities sum to {sum}, not 1"
            )));
        }
        Ok(ProbabilityVector { probs })
    }

    pub fn from_distribution(dist: &OrdinalDistribution) -> Result<Self> {
        if dist.n == 0 {
            return Err(Error::Validation("distribution has no windows".into()));
        }
        ProbabilityVector::new(dist.probabilities())
    }

    /// Equiprobable distribution over `n` outcomes.
    pub fn uniform(n: usize) -> Result<Self> {
        ProbabilityVector::new(vec![1.0 / n as f64; n])
    }

    /// All mass on the first of `n` outcomes.
    pub fn degenerate(n: usize) -> Result<Self> {
        let mut probs = vec![0.0; n];
        if let Some(first) = probs.first_mut() {
            *first = 1.0;
        }
        ProbabilityVector::new(probs)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

fn entropy_of(probs: &[f64], base: LogBase) -> f64 {
    probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * base.log(p))
        .sum::<f64>()
        .abs()
}

pub fn shannon_entropy(p: &ProbabilityVector) -> f64 {
    entropy_of(&p.probs, LogBase::Natural)
}

fn normalized_entropy_in(p: &ProbabilityVector, base: LogBase) -> f64 {
    let s_max = base.log(p.len() as f64);
    // Rounding can push a uniform distribution a hair past 1.
    (entropy_of(&p.probs, base) / s_max).clamp(0.0, 1.0)
}

/// `S / ln(n)` with `n` the number of outcomes (`d!` for ordinal data).
pub fn normalized_entropy(p: &ProbabilityVector) -> f64 {
    normalized_entropy_in(p, LogBase::Natural)
}

/// Squared Euclidean distance to the uniform distribution.
pub fn lmc_disequilibrium(p: &ProbabilityVector) -> f64 {
    let u = 1.0 / p.len() as f64;
    p.probs.iter().map(|&pi| (pi - u) * (pi - u)).sum()
}

pub fn lmc_complexity(p: &ProbabilityVector) -> f64 {
    normalized_entropy(p) * lmc_disequilibrium(p)
}

fn js_divergence_in(p: &[f64], q: &[f64], base: LogBase) -> f64 {
    let mixture: Vec<f64> = p.iter().zip(q).map(|(a, b)| 0.5 * (a + b)).collect();
    let d = entropy_of(&mixture, base) - 0.5 * entropy_of(p, base) - 0.5 * entropy_of(q, base);
    d.max(0.0)
}

/// `S[(P + Q) / 2] - S(P) / 2 - S(Q) / 2`.
pub fn js_divergence(p: &ProbabilityVector, q: &ProbabilityVector) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::Validation(format!(
            "length mismatch: {} vs {}",
            p.len(),
            q.len()
        )));
    }
    Ok(js_divergence_in(&p.probs, &q.probs, LogBase::Natural))
}

fn js_dmax_in(n_patterns: usize, base: LogBase) -> Result<f64> {
    if n_patterns < 2 {
        return Err(Error::Domain(format!(
            "D_max needs at least two patterns, got {n_patterns}"
        )));
    }
    let n = n_patterns as f64;
    Ok(-0.5 * ((n + 1.0) / n * base.log(n + 1.0) - 2.0 * base.log(2.0 * n) + base.log(n)))
}

/// Largest Jensen-Shannon divergence from uniform over `n_patterns`
/// outcomes, reached by a degenerate distribution.
pub fn js_dmax(n_patterns: usize) -> Result<f64> {
    js_dmax_in(n_patterns, LogBase::Natural)
}

/// Normalized Jensen-Shannon complexity `H * D_JS(P, P_e) / D_max`.
pub fn js_complexity(p: &ProbabilityVector) -> f64 {
    report_in(p, LogBase::Natural).c_js
}

/// All quantifiers of one distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantifierReport {
    /// Raw Shannon entropy.
    pub entropy_s: f64,
    /// Normalized entropy in `[0, 1]`.
    pub entropy_h: f64,
    pub d_lmc: f64,
    pub c_lmc: f64,
    /// `D_JS(P, P_e) / D_max`.
    pub d_js: f64,
    pub c_js: f64,
}

fn report_in(p: &ProbabilityVector, base: LogBase) -> QuantifierReport {
    let n = p.len();
    let uniform = vec![1.0 / n as f64; n];
    let entropy_s = entropy_of(&p.probs, base);
    let entropy_h = normalized_entropy_in(p, base);
    let d_lmc = lmc_disequilibrium(p);
    // n >= 2 is a ProbabilityVector invariant.
    let d_max = js_dmax_in(n, base).expect("at least two outcomes");
    let d_js = js_divergence_in(&p.probs, &uniform, base) / d_max;
    QuantifierReport {
        entropy_s,
        entropy_h,
        d_lmc,
        c_lmc: entropy_h * d_lmc,
        d_js,
        c_js: entropy_h * d_js,
    }
}

impl QuantifierReport {
    pub fn from_probabilities(p: &ProbabilityVector) -> Self {
        report_in(p, LogBase::Natural)
    }

    /// Same report with every logarithm taken in `base`. Only `entropy_s`
    /// changes.
    pub fn from_probabilities_in(p: &ProbabilityVector, base: LogBase) -> Self {
        report_in(p, base)
    }

    pub fn is_finite(&self) -> bool {
        [
            self.entropy_s,
            self.entropy_h,
            self.d_lmc,
            self.c_lmc,
            self.d_js,
            self.c_js,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

/// Ordinal distribution of `series` and its quantifiers.
pub fn quantify(series: &TimeSeries, cfg: &OrdinalConfig) -> Result<QuantifierReport> {
    let dist = ordinal_distribution(series, cfg)?;
    let p = ProbabilityVector::from_distribution(&dist)?;
    Ok(QuantifierReport::from_probabilities(&p))
}
