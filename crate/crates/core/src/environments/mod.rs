//! Loss generators for the four games (full/bandit × stochastic/adversarial),
//! expert advice, adversarial breaker sequences and offline replay.

mod breakers;
mod replay;

pub use breakers::{make_ftl_breaker, make_ucb_breaker, UcbBreaker};
pub use replay::{
    parse_log, parse_log_line, replay_importance_weighted, replay_rejection_sampling, synthetic_log, write_log,
    LogRecord, ReplayMode, ReplayTranscript,
};

use crate::error::{check_unit, domain, Error, Result};
use crate::online_policies::{Feedback, Observation, Policy};
use crate::rng::{split, unit_from_bits, SimRng};

/// An oblivious environment: every loss is a fixed function of (t, arm).
pub trait Environment: Send + Sync {
    fn arms(&self) -> usize;
    /// ℓ_{t,a} for the 1-based round t.
    fn loss(&self, t: usize, arm: usize) -> f64;
    fn column(&self, t: usize) -> Vec<f64> {
        (0..self.arms()).map(|a| self.loss(t, a)).collect()
    }
    /// Expected losses μ(a) when the environment is stochastic.
    fn loss_means(&self) -> Option<Vec<f64>> {
        None
    }
    /// Expert advice for round t, one distribution over arms per expert.
    fn advice(&self, _t: usize) -> Option<Vec<Vec<f64>>> {
        None
    }
    /// Largest playable horizon, if finite.
    fn max_horizon(&self) -> Option<usize> {
        None
    }
}

/// Independent Bernoulli(μ(a)) losses. Each entry is derived from
/// (seed, t, a) alone, so revealed values never depend on query order.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliEnv {
    means: Vec<f64>,
    seed: u64,
}

impl BernoulliEnv {
    pub fn new(loss_means: Vec<f64>, seed: u64) -> Result<Self> {
        if loss_means.is_empty() {
            return domain("need at least one arm");
        }
        for m in &loss_means {
            check_unit("mean", *m)?;
        }
        Ok(Self { means: loss_means, seed })
    }

    /// Reward means μ(a) turned into loss means 1 − μ(a).
    pub fn from_reward_means(reward_means: &[f64], seed: u64) -> Result<Self> {
        for m in reward_means {
            check_unit("mean", *m)?;
        }
        Self::new(reward_means.iter().map(|m| 1.0 - m).collect(), seed)
    }
}

impl Environment for BernoulliEnv {
    fn arms(&self) -> usize {
        self.means.len()
    }
    fn loss(&self, t: usize, arm: usize) -> f64 {
        let u = unit_from_bits(split(split(self.seed, t as u64), arm as u64));
        (u < self.means[arm]) as u8 as f64
    }
    fn loss_means(&self) -> Option<Vec<f64>> {
        Some(self.means.clone())
    }
}

/// A loss matrix fixed before the game; row t−1 is round t.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixEnv {
    rows: Vec<Vec<f64>>,
}

impl MatrixEnv {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = rows.first().map_or(0, |r| r.len());
        if k == 0 {
            return domain("empty loss matrix");
        }
        for r in &rows {
            if r.len() != k {
                return Err(Error::LengthMismatch { expected: k, got: r.len() });
            }
            if let Some(v) = r.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return domain(format!("matrix entry {v} outside [0, 1]"));
            }
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }
}

impl Environment for MatrixEnv {
    fn arms(&self) -> usize {
        self.rows[0].len()
    }
    fn loss(&self, t: usize, arm: usize) -> f64 {
        self.rows[t - 1][arm]
    }
    fn max_horizon(&self) -> Option<usize> {
        Some(self.rows.len())
    }
}

/// How an expert forms its advice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Expert {
    /// Always recommends one arm.
    Constant(usize),
    Uniform,
    /// A fresh random distribution every round.
    Random,
}

/// Bernoulli losses plus advice from a fixed panel of experts.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpertAdviceEnv {
    base: BernoulliEnv,
    experts: Vec<Expert>,
    seed: u64,
}

impl ExpertAdviceEnv {
    pub fn new(base: BernoulliEnv, experts: Vec<Expert>, seed: u64) -> Result<Self> {
        if experts.is_empty() {
            return domain("need at least one expert");
        }
        for e in &experts {
            if let Expert::Constant(a) = e {
                if *a >= base.arms() {
                    return domain(format!("expert recommends arm {a} of {}", base.arms()));
                }
            }
        }
        Ok(Self { base, experts, seed })
    }

    /// N experts: the first always plays the best arm, the rest cycle
    /// through other constant arms, uniform and random advice.
    pub fn standard(base: BernoulliEnv, n: usize, seed: u64) -> Result<Self> {
        let k = base.arms();
        let means = base.loss_means().unwrap_or_default();
        let best = crate::online_policies::ftl_choice(&means)?;
        let mut panel = vec![Expert::Constant(best)];
        let others: Vec<usize> = (0..k).filter(|a| *a != best).collect();
        let mut i = 0;
        while panel.len() < n {
            let e = match i % (others.len() + 2) {
                j if j < others.len() => Expert::Constant(others[j]),
                j if j == others.len() => Expert::Uniform,
                _ => Expert::Random,
            };
            panel.push(e);
            i += 1;
        }
        Self::new(base, panel, seed)
    }

    pub fn experts(&self) -> &[Expert] {
        &self.experts
    }
}

impl Environment for ExpertAdviceEnv {
    fn arms(&self) -> usize {
        self.base.arms()
    }
    fn loss(&self, t: usize, arm: usize) -> f64 {
        self.base.loss(t, arm)
    }
    fn loss_means(&self) -> Option<Vec<f64>> {
        self.base.loss_means()
    }
    fn advice(&self, t: usize) -> Option<Vec<Vec<f64>>> {
        let k = self.arms();
        Some(
            self.experts
                .iter()
                .enumerate()
                .map(|(h, e)| match e {
                    Expert::Constant(a) => (0..k).map(|b| (b == *a) as u8 as f64).collect(),
                    Expert::Uniform => vec![1.0 / k as f64; k],
                    Expert::Random => {
                        let s = split(split(self.seed, t as u64), h as u64);
                        let w: Vec<f64> = (0..k).map(|a| unit_from_bits(split(s, a as u64)) + 1e-9).collect();
                        let tot: f64 = w.iter().sum();
                        w.into_iter().map(|x| x / tot).collect()
                    }
                })
                .collect(),
        )
    }
}

/// Per-round record of one game and its running regret measures.
#[derive(Debug, Clone, PartialEq)]
pub struct GameTranscript {
    pub arms: Vec<usize>,
    pub losses: Vec<f64>,
    /// Distributions used, when requested and the policy is randomized.
    pub dists: Option<Vec<Vec<f64>>>,
    /// N_T(a)
    pub counts: Vec<usize>,
    /// Σ_s ℓ_{s,A_s} − min_a Σ_s ℓ_{s,a}, per round.
    pub regret: Vec<f64>,
    /// Σ_s Σ_a p_s(a)ℓ_{s,a} − min_a Σ_s ℓ_{s,a}, when every round has a distribution.
    pub expected_regret: Option<Vec<f64>>,
    /// Σ_s Δ(A_s), for stochastic environments.
    pub pseudo_regret: Option<Vec<f64>>,
    /// Σ_s ℓ_{s,A_s} − min_h Σ_s Σ_a q_{s,h}(a)ℓ_{s,a}, with expert advice.
    pub expert_regret: Option<Vec<f64>>,
    /// Σ_s μ(A_s) − min_h Σ_s Σ_a q_{s,h}(a)μ(a), with advice and known means.
    pub expert_pseudo_regret: Option<Vec<f64>>,
}

/// Which feedback the environment hands out.
pub type FeedbackMode = Observation;

/// Plays `horizon` rounds. Full-information policies need `mode = Full`.
pub fn play(
    env: &dyn Environment,
    policy: &mut dyn Policy,
    horizon: usize,
    mode: FeedbackMode,
    rng: &mut SimRng,
    keep_dists: bool,
) -> Result<GameTranscript> {
    let k = env.arms();
    if policy.arms() != k {
        return Err(Error::LengthMismatch { expected: k, got: policy.arms() });
    }
    if policy.observation() == Observation::Full && mode == Observation::Bandit {
        return domain(format!("{} needs full information but the game is a bandit game", policy.name()));
    }
    if let Some(max) = env.max_horizon() {
        if horizon > max {
            return domain(format!("horizon {horizon} exceeds the {max} rows of the loss matrix"));
        }
    }
    let means = env.loss_means();
    let best_mean = means.as_ref().map(|m| m.iter().cloned().fold(f64::INFINITY, f64::min));
    let mut tr = GameTranscript {
        arms: Vec::with_capacity(horizon),
        losses: Vec::with_capacity(horizon),
        dists: keep_dists.then(Vec::new),
        counts: vec![0; k],
        regret: Vec::with_capacity(horizon),
        expected_regret: Some(Vec::with_capacity(horizon)),
        pseudo_regret: means.as_ref().map(|_| Vec::with_capacity(horizon)),
        expert_regret: None,
        expert_pseudo_regret: None,
    };
    let mut cum_arm = vec![0.0; k];
    let (mut cum, mut cum_expected, mut cum_pseudo, mut cum_mean) = (0.0, 0.0, 0.0, 0.0);
    let mut cum_expert: Vec<f64> = Vec::new();
    let mut cum_expert_mean: Vec<f64> = Vec::new();
    for t in 1..=horizon {
        let advice = env.advice(t);
        let d = policy.decide(t, advice.as_deref(), rng)?;
        if d.arm >= k {
            return domain(format!("{} chose arm {} of {k}", policy.name(), d.arm));
        }
        let col = env.column(t);
        let loss = col[d.arm];
        cum += loss;
        for (c, l) in cum_arm.iter_mut().zip(&col) {
            *c += l;
        }
        let best = cum_arm.iter().cloned().fold(f64::INFINITY, f64::min);
        tr.regret.push(cum - best);
        match (&d.dist, tr.expected_regret.as_mut()) {
            (Some(p), Some(er)) => {
                cum_expected += p.iter().zip(&col).map(|(a, b)| a * b).sum::<f64>();
                er.push(cum_expected - best);
            }
            _ => tr.expected_regret = None,
        }
        if let (Some(m), Some(pr), Some(b)) = (&means, tr.pseudo_regret.as_mut(), best_mean) {
            cum_pseudo += m[d.arm] - b;
            pr.push(cum_pseudo);
        }
        if let Some(adv) = &advice {
            if cum_expert.is_empty() {
                cum_expert = vec![0.0; adv.len()];
                cum_expert_mean = vec![0.0; adv.len()];
                tr.expert_regret = Some(Vec::with_capacity(horizon));
                tr.expert_pseudo_regret = means.as_ref().map(|_| Vec::with_capacity(horizon));
            }
            for (h, q) in adv.iter().enumerate() {
                cum_expert[h] += q.iter().zip(&col).map(|(a, b)| a * b).sum::<f64>();
                if let Some(m) = &means {
                    cum_expert_mean[h] += q.iter().zip(m).map(|(a, b)| a * b).sum::<f64>();
                }
            }
            let best_h = cum_expert.iter().cloned().fold(f64::INFINITY, f64::min);
            if let Some(er) = tr.expert_regret.as_mut() {
                er.push(cum - best_h);
            }
            if let (Some(m), Some(epr)) = (&means, tr.expert_pseudo_regret.as_mut()) {
                cum_mean += m[d.arm];
                let best_hm = cum_expert_mean.iter().cloned().fold(f64::INFINITY, f64::min);
                epr.push(cum_mean - best_hm);
            }
        }
        let fb = match policy.observation() {
            Observation::Full => Feedback::Full(col),
            Observation::Bandit => Feedback::Bandit { arm: d.arm, loss },
        };
        policy.update(&fb)?;
        tr.arms.push(d.arm);
        tr.losses.push(loss);
        tr.counts[d.arm] += 1;
        if let (Some(ds), Some(p)) = (tr.dists.as_mut(), d.dist) {
            ds.push(p);
        }
    }
    Ok(tr)
}

/// Prefix sums of Δ(A_s) = μ(A_s) − min_a μ(a) for loss means μ.
pub fn pseudo_regret(arms: &[usize], loss_means: &[f64]) -> Result<Vec<f64>> {
    if loss_means.is_empty() {
        return domain("means unknown");
    }
    let best = loss_means.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut acc = 0.0;
    arms.iter()
        .map(|&a| {
            let m = loss_means.get(a).ok_or_else(|| Error::Domain(format!("arm {a} out of range")))?;
            acc += m - best;
            Ok(acc)
        })
        .collect()
}
