//! Online decision rules for the expert (full information) and bandit
//! games. All policies minimize losses in [0, 1]; reward-based rules work
//! with r = 1 − ℓ internally.

mod exp3;
mod hedge;
mod ucb;

pub use exp3::{exp4_mix, importance_weighted_loss, Exp3, Exp3Variant, Exp4, Exp4Mix};
pub use hedge::{doubling_schedule, ftl_choice, hedge_distribution, hedge_eta, DoublingHedge, Ftl, Hedge, HedgeEta};
pub use ucb::{epsilon_first_schedule, ucb_index, EpsilonFirst, Ucb1, UcbParam};

use crate::divergences::sample_index;
use crate::error::{domain, Error, Result};
use crate::rng::SimRng;
use rand::Rng;

/// What the learner observes after acting.
#[derive(Debug, Clone, PartialEq)]
pub enum Feedback {
    /// The whole loss column ℓ_{t,·}.
    Full(Vec<f64>),
    /// Only the loss of the chosen arm.
    Bandit { arm: usize, loss: f64 },
}

impl Feedback {
    pub fn validate(&self, k: usize) -> Result<()> {
        match self {
            Feedback::Full(col) => {
                if col.len() != k {
                    return Err(Error::LengthMismatch { expected: k, got: col.len() });
                }
                if col.iter().any(|l| !(0.0..=1.0).contains(l)) {
                    return domain("losses must lie in [0, 1]");
                }
            }
            Feedback::Bandit { arm, loss } => {
                if *arm >= k || !(0.0..=1.0).contains(loss) {
                    return domain("bandit feedback out of range");
                }
            }
        }
        Ok(())
    }
}

/// Which observation model a policy needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observation {
    Full,
    Bandit,
}

/// The arm played in a round and, for randomized policies, the distribution
/// it was drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub arm: usize,
    pub dist: Option<Vec<f64>>,
}

pub trait Policy: Send {
    fn name(&self) -> String;
    fn arms(&self) -> usize;
    fn observation(&self) -> Observation;
    /// Chooses the arm for round `t` (1-based). `advice` holds one
    /// distribution over arms per expert for policies that use it.
    fn decide(&mut self, t: usize, advice: Option<&[Vec<f64>]>, rng: &mut SimRng) -> Result<Decision>;
    fn update(&mut self, feedback: &Feedback) -> Result<()>;
}

pub(crate) fn draw(p: &[f64], rng: &mut SimRng) -> usize {
    sample_index(p, rng.random::<f64>())
}

/// exp(−η(x − min x)) normalized.
pub(crate) fn softmin(values: &[f64], eta: f64) -> Vec<f64> {
    let m = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = values.iter().map(|v| (-eta * (v - m)).exp()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

pub(crate) fn argmin_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Always plays the same arm.
#[derive(Debug, Clone)]
pub struct FixedArm {
    k: usize,
    arm: usize,
}

impl FixedArm {
    pub fn new(k: usize, arm: usize) -> Result<Self> {
        if arm >= k {
            return domain(format!("arm {arm} out of range for K = {k}"));
        }
        Ok(Self { k, arm })
    }
}

impl Policy for FixedArm {
    fn name(&self) -> String {
        format!("fixed-{}", self.arm)
    }
    fn arms(&self) -> usize {
        self.k
    }
    fn observation(&self) -> Observation {
        Observation::Bandit
    }
    fn decide(&mut self, _t: usize, _a: Option<&[Vec<f64>]>, _rng: &mut SimRng) -> Result<Decision> {
        Ok(Decision { arm: self.arm, dist: None })
    }
    fn update(&mut self, _f: &Feedback) -> Result<()> {
        Ok(())
    }
}

/// Plays uniformly at random.
#[derive(Debug, Clone)]
pub struct UniformPolicy {
    k: usize,
}

impl UniformPolicy {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return domain("need at least one arm");
        }
        Ok(Self { k })
    }
}

impl Policy for UniformPolicy {
    fn name(&self) -> String {
        "uniform".into()
    }
    fn arms(&self) -> usize {
        self.k
    }
    fn observation(&self) -> Observation {
        Observation::Bandit
    }
    fn decide(&mut self, _t: usize, _a: Option<&[Vec<f64>]>, rng: &mut SimRng) -> Result<Decision> {
        let p = vec![1.0 / self.k as f64; self.k];
        Ok(Decision { arm: draw(&p, rng), dist: Some(p) })
    }
    fn update(&mut self, _f: &Feedback) -> Result<()> {
        Ok(())
    }
}
