//! High-confidence bounds on the mean of bounded random variables.

mod bernstein;
mod kl;
mod lemmas;
mod tails;

pub use bernstein::{
    bernstein_duals, bernstein_mean_bound, empirical_bernstein_mean_bound, psi, unexpected_bernstein_mean_bound, Dual,
    LambdaGrid,
};
pub use kl::{kl_mean_bound, kl_mgf_exact, split_kl_mean_bound, KlVariant};
pub use lemmas::{mgf_lemma_check, MgfLemma};
pub use tails::{hoeffding_mean_bound, hoeffding_radius, hoeffding_solve_n, markov_chebyshev_tail, Sides, Tail};

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{check_delta, domain, Result};

/// Observed values X_1..X_n with a known upper bound b (and optionally a
/// lower bound). `unit` marks samples declared to live in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
    upper: f64,
    lower: Option<f64>,
    unit: bool,
}

impl Sample {
    /// A sample of [0, 1]-valued observations.
    pub fn unit(values: Vec<f64>) -> Result<Self> {
        Self::check_nonempty(&values)?;
        if let Some(v) = values.iter().find(|v| v.is_nan() || !(0.0..=1.0).contains(*v)) {
            return domain(format!("value {v} outside [0, 1]"));
        }
        Ok(Self { values, upper: 1.0, lower: Some(0.0), unit: true })
    }

    /// A sample bounded above by `upper` and optionally below by `lower`.
    pub fn bounded(values: Vec<f64>, lower: Option<f64>, upper: f64) -> Result<Self> {
        Self::check_nonempty(&values)?;
        if upper.is_nan() || lower.is_some_and(|l| l.is_nan() || l > upper) {
            return domain("invalid sample range");
        }
        if let Some(v) = values.iter().find(|v| v.is_nan() || **v > upper || lower.is_some_and(|l| **v < l)) {
            return domain(format!("value {v} outside the declared range"));
        }
        let unit = lower == Some(0.0) && upper == 1.0;
        Ok(Self { values, upper, lower, unit })
    }

    fn check_nonempty(values: &[f64]) -> Result<()> {
        if values.is_empty() {
            return domain("empty sample");
        }
        Ok(())
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

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn lower(&self) -> Option<f64> {
        self.lower
    }

    pub fn is_unit(&self) -> bool {
        self.unit
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn mean_of_squares(&self) -> f64 {
        self.values.iter().map(|x| x * x).sum::<f64>() / self.values.len() as f64
    }
}

/// Segment boundaries b_0 < b_1 < … < b_K used to split a random variable
/// into binary pieces.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitGrid {
    b: Vec<f64>,
}

impl SplitGrid {
    pub fn new(b: Vec<f64>) -> Result<Self> {
        if b.len() < 2 {
            return domain("split grid needs at least two points");
        }
        if b.iter().any(|x| !x.is_finite()) || b.windows(2).any(|w| w[1] <= w[0]) {
            return domain("split grid must be finite and strictly increasing");
        }
        Ok(Self { b })
    }

    /// Uniform grid with `k` segments on [lo, hi].
    pub fn uniform(lo: f64, hi: f64, k: usize) -> Result<Self> {
        if k == 0 {
            return domain("grid with zero segments");
        }
        Self::new((0..=k).map(|j| lo + (hi - lo) * j as f64 / k as f64).collect())
    }

    pub fn points(&self) -> &[f64] {
        &self.b
    }

    /// Number of segments K.
    pub fn k(&self) -> usize {
        self.b.len() - 1
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.b.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// X_{|j} for j = 1..K: the clamped fraction of segment j covered by x.
    /// For grid-valued x this is the indicator 1[x ≥ b_j].
    pub fn decompose(&self, x: f64) -> Vec<f64> {
        self.b.windows(2).map(|w| ((x - w[0]) / (w[1] - w[0])).clamp(0.0, 1.0)).collect()
    }

    /// b_0 + Σ α_j X_{|j}.
    pub fn reconstruct(&self, parts: &[f64]) -> f64 {
        self.b[0] + self.alphas().iter().zip(parts).map(|(a, p)| a * p).sum::<f64>()
    }
}

/// Which theorem produced a [`BoundResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Hoeffding,
    Kl,
    KlViaLemma,
    SplitKl,
    Bernstein,
    EmpiricalBernstein,
    UnexpectedBernstein,
    OccamHoeffding,
    OccamKl,
    PacBayesKl,
    PacBayesLambda,
    PacBayesLambdaLower,
    PacBayesUnexpectedBernstein,
    MajorityVoteFirstOrder,
    MajorityVoteTandem,
    MajorityVoteDisagreement,
    PacBayesSplitKl,
    RecursivePacBayes,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::Hoeffding => "hoeffding",
            Method::Kl => "kl",
            Method::KlViaLemma => "kl-via-lemma",
            Method::SplitKl => "split-kl",
            Method::Bernstein => "bernstein",
            Method::EmpiricalBernstein => "empirical-bernstein",
            Method::UnexpectedBernstein => "unexpected-bernstein",
            Method::OccamHoeffding => "occam-hoeffding",
            Method::OccamKl => "occam-kl",
            Method::PacBayesKl => "pac-bayes-kl",
            Method::PacBayesLambda => "pac-bayes-lambda",
            Method::PacBayesLambdaLower => "pac-bayes-lambda-lower",
            Method::PacBayesUnexpectedBernstein => "pac-bayes-unexpected-bernstein",
            Method::MajorityVoteFirstOrder => "mv-first-order",
            Method::MajorityVoteTandem => "mv-tandem",
            Method::MajorityVoteDisagreement => "mv-disagreement",
            Method::PacBayesSplitKl => "pac-bayes-split-kl",
            Method::RecursivePacBayes => "recursive-pac-bayes",
        };
        f.write_str(s)
    }
}

/// A computed bound with its confidence parameter and auxiliary terms.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundResult {
    pub value: f64,
    pub delta: f64,
    pub method: Method,
    pub detail: BTreeMap<String, f64>,
}

impl BoundResult {
    pub(crate) fn new(value: f64, delta: f64, method: Method) -> Result<Self> {
        check_delta(delta)?;
        Ok(Self { value, delta, method, detail: BTreeMap::new() })
    }

    pub(crate) fn with(mut self, key: &str, v: f64) -> Self {
        self.detail.insert(key.to_string(), v);
        self
    }

    pub(crate) fn clip_unit(mut self, unit: bool) -> Self {
        if unit {
            self.detail.insert("unclipped".into(), self.value);
            self.value = self.value.clamp(0.0, 1.0);
        }
        self
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.detail.get(key).copied()
    }
}

pub(crate) fn check_n(n: u64) -> Result<()> {
    if n == 0 {
        return domain("sample size must be at least 1");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn grid_validation() {
        assert!(SplitGrid::new(vec![0.0]).is_err());
        assert!(SplitGrid::new(vec![0.0, 0.0, 1.0]).is_err());
        let g = SplitGrid::uniform(0.0, 1.0, 2).unwrap();
        assert_eq!(g.points(), &[0.0, 0.5, 1.0]);
        assert_eq!(g.k(), 2);
        let s: f64 = g.alphas().iter().sum();
        assert!((s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn decomposition_telescopes_on_grid_points() {
        let g = SplitGrid::new(vec![-1.0, 0.0, 0.5, 1.0]).unwrap();
        for &x in g.points() {
            let parts = g.decompose(x);
            assert!(parts.iter().all(|p| *p == 0.0 || *p == 1.0));
            assert_eq!(g.reconstruct(&parts), x);
        }
    }

    #[test]
    fn sample_validation() {
        assert!(Sample::unit(vec![]).is_err());
        assert!(Sample::unit(vec![0.5, 1.1]).is_err());
        assert!(Sample::bounded(vec![2.0], None, 1.0).is_err());
        assert!(Sample::bounded(vec![-3.0, 1.0], None, 1.0).is_ok());
    }

    proptest! {
        #[test]
        fn decomposition_reconstructs(x in -1.0f64..=1.0, k in 1usize..8) {
            let g = SplitGrid::uniform(-1.0, 1.0, k).unwrap();
            prop_assert!((g.reconstruct(&g.decompose(x)) - x).abs() <= 1e-12);
        }
    }
}
