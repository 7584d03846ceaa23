//! Generalization bounds over finite hypothesis classes represented as loss
//! tables: Occam, PAC-Bayes-kl/λ/split-kl/Unexpected-Bernstein, majority
//! vote bounds and Recursive PAC-Bayes.

mod bounds;
mod gibbs;
mod majority_vote;
mod occam;
mod recursive;

pub use bounds::{
    optimal_lambda, pb_kl_bound, pb_lambda_bound, pb_split_kl_bound, pb_unexpected_bernstein_bound, LambdaSide,
};
pub use gibbs::{alternating_minimize, gibbs_posterior, AltMinResult};
pub use majority_vote::{l2d_terms, mv_bound, mv_oracles, mv_predict, L2dTerms, MvKind};
pub use occam::{occam_bound, tree_prior, tree_prior_ln, OccamFlavor};
pub use recursive::{geometric_split, recursive_pb, RecursiveConfig, RecursiveStage};

use rand::Rng;

use crate::divergences::{categorical_kl, Nats, ProbVec};
use crate::error::{check_delta, domain, Error, Result};

/// Losses of m hypotheses on n examples, row-major, with optional ±1
/// predictions and optional per-hypothesis validation masks.
#[derive(Debug, Clone, PartialEq)]
pub struct LossTable {
    m: usize,
    n: usize,
    losses: Vec<f64>,
    predictions: Option<Vec<i8>>,
    masks: Option<Vec<Vec<bool>>>,
}

impl LossTable {
    pub fn new(m: usize, n: usize, losses: Vec<f64>) -> Result<Self> {
        if m == 0 || n == 0 {
            return domain("loss table needs at least one row and one column");
        }
        if losses.len() != m * n {
            return Err(Error::LengthMismatch { expected: m * n, got: losses.len() });
        }
        if let Some(v) = losses.iter().find(|v| v.is_nan() || !(0.0..=1.0).contains(*v)) {
            return domain(format!("loss {v} outside [0, 1]"));
        }
        Ok(Self { m, n, losses, predictions: None, masks: None })
    }

    /// Zero-one losses of ±1 predictions (m × n, row-major) against labels.
    pub fn from_predictions(m: usize, predictions: Vec<i8>, labels: &[i8]) -> Result<Self> {
        let n = labels.len();
        if predictions.len() != m * n {
            return Err(Error::LengthMismatch { expected: m * n, got: predictions.len() });
        }
        check_signs(&predictions)?;
        check_signs(labels)?;
        let losses = predictions.iter().enumerate().map(|(idx, &p)| (p != labels[idx % n]) as u8 as f64).collect();
        let mut t = Self::new(m, n, losses)?;
        t.predictions = Some(predictions);
        Ok(t)
    }

    /// Hypothesis losses drawn as independent Bernoulli(mean_h) entries.
    pub fn bernoulli<R: Rng + ?Sized>(means: &[f64], n: usize, rng: &mut R) -> Result<Self> {
        let m = means.len();
        let mut losses = Vec::with_capacity(m * n);
        for &mu in means {
            crate::error::check_unit("mean", mu)?;
            for _ in 0..n {
                losses.push((rng.random::<f64>() < mu) as u8 as f64);
            }
        }
        Self::new(m, n, losses)
    }

    /// Attach validation masks: `masks[h][i]` marks column i as a validation
    /// example for hypothesis h.
    pub fn with_masks(mut self, masks: Vec<Vec<bool>>) -> Result<Self> {
        if masks.len() != self.m {
            return Err(Error::LengthMismatch { expected: self.m, got: masks.len() });
        }
        for mask in &masks {
            if mask.len() != self.n {
                return Err(Error::LengthMismatch { expected: self.n, got: mask.len() });
            }
            if !mask.iter().any(|b| *b) {
                return domain("validation mask selects no examples");
            }
        }
        self.masks = Some(masks);
        Ok(self)
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    pub fn loss(&self, h: usize, i: usize) -> f64 {
        self.losses[h * self.n + i]
    }

    pub fn row(&self, h: usize) -> &[f64] {
        &self.losses[h * self.n..(h + 1) * self.n]
    }

    pub fn prediction(&self, h: usize, i: usize) -> Option<i8> {
        self.predictions.as_ref().map(|p| p[h * self.n + i])
    }

    pub fn has_predictions(&self) -> bool {
        self.predictions.is_some()
    }

    pub fn masks(&self) -> Option<&[Vec<bool>]> {
        self.masks.as_deref()
    }

    fn in_mask(&self, h: usize, i: usize) -> bool {
        self.masks.as_ref().is_none_or(|m| m[h][i])
    }

    /// Number of (validation) columns used for hypothesis h.
    pub fn count(&self, h: usize) -> usize {
        match &self.masks {
            Some(m) => m[h].iter().filter(|b| **b).count(),
            None => self.n,
        }
    }

    /// L̂(h): masked row means.
    pub fn empirical_losses(&self) -> Vec<f64> {
        (0..self.m)
            .map(|h| {
                let (mut s, mut c) = (0.0, 0usize);
                for i in 0..self.n {
                    if self.in_mask(h, i) {
                        s += self.loss(h, i);
                        c += 1;
                    }
                }
                s / c as f64
            })
            .collect()
    }

    /// Effective sample size: smallest per-hypothesis validation count.
    pub fn n_eff(&self) -> usize {
        (0..self.m).map(|h| self.count(h)).min().unwrap_or(0)
    }

    /// Empirical tandem losses L̂(h, h') = mean of ℓ_h·ℓ_h' over the overlap
    /// of validation masks, and the smallest overlap size.
    pub fn tandem_matrix(&self) -> Result<(Vec<f64>, usize)> {
        let m = self.m;
        let mut out = vec![0.0; m * m];
        let mut min_overlap = usize::MAX;
        for a in 0..m {
            for b in a..m {
                let (mut s, mut c) = (0.0, 0usize);
                for i in 0..self.n {
                    if self.in_mask(a, i) && self.in_mask(b, i) {
                        s += self.loss(a, i) * self.loss(b, i);
                        c += 1;
                    }
                }
                if c == 0 {
                    return domain(format!("validation masks of {a} and {b} do not overlap"));
                }
                min_overlap = min_overlap.min(c);
                out[a * m + b] = s / c as f64;
                out[b * m + a] = s / c as f64;
            }
        }
        Ok((out, min_overlap))
    }
}

fn check_signs(v: &[i8]) -> Result<()> {
    if let Some(x) = v.iter().find(|x| **x != 1 && **x != -1) {
        return domain(format!("prediction {x} is not ±1"));
    }
    Ok(())
}

/// ±1 predictions of m hypotheses on (possibly unlabeled) examples.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionTable {
    m: usize,
    n: usize,
    predictions: Vec<i8>,
}

impl PredictionTable {
    pub fn new(m: usize, predictions: Vec<i8>) -> Result<Self> {
        if m == 0 || predictions.is_empty() || !predictions.len().is_multiple_of(m) {
            return domain("prediction table must be a nonempty m × n matrix");
        }
        check_signs(&predictions)?;
        let n = predictions.len() / m;
        Ok(Self { m, n, predictions })
    }

    pub fn from_loss_table(t: &LossTable) -> Option<Self> {
        t.predictions.as_ref().map(|p| Self { m: t.m, n: t.n, predictions: p.clone() })
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    pub fn column(&self, i: usize) -> Vec<i8> {
        (0..self.m).map(|h| self.predictions[h * self.n + i]).collect()
    }

    /// D̂(h, h') = fraction of columns where h and h' disagree.
    pub fn disagreement_matrix(&self) -> Vec<f64> {
        let (m, n) = (self.m, self.n);
        let mut out = vec![0.0; m * m];
        for a in 0..m {
            for b in (a + 1)..m {
                let d = (0..n).filter(|&i| self.predictions[a * n + i] != self.predictions[b * n + i]).count() as f64
                    / n as f64;
                out[a * m + b] = d;
                out[b * m + a] = d;
            }
        }
        out
    }
}

/// Posterior ρ, prior π, sample size and confidence of a PAC-Bayes bound.
#[derive(Debug, Clone, PartialEq)]
pub struct PacBayesQuery {
    pub rho: ProbVec,
    pub pi: ProbVec,
    pub n: usize,
    pub delta: f64,
}

impl PacBayesQuery {
    pub fn new(rho: ProbVec, pi: ProbVec, n: usize, delta: f64) -> Result<Self> {
        if rho.len() != pi.len() {
            return Err(Error::LengthMismatch { expected: pi.len(), got: rho.len() });
        }
        if n == 0 {
            return domain("n must be positive");
        }
        check_delta(delta)?;
        Ok(Self { rho, pi, n, delta })
    }

    pub fn kl(&self) -> Result<Nats> {
        categorical_kl(&self.rho, &self.pi)
    }
}

/// E_{ρ⊗ρ}[M] for an m × m row-major matrix.
pub(crate) fn quad_form(rho: &[f64], mat: &[f64]) -> f64 {
    let m = rho.len();
    let mut s = 0.0;
    for a in 0..m {
        for b in 0..m {
            s += rho[a] * rho[b] * mat[a * m + b];
        }
    }
    s
}
