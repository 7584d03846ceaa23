use super::MatrixEnv;
use crate::error::{domain, Result};
use crate::online_policies::{Ucb1, UcbParam};

/// Two-arm matrix on which lowest-index FTL loses every round from t = 2.
///
/// ℓ_1 = (0.5, 0) makes arm 1 the leader; afterwards the row always punishes
/// the current leader, so the leaders alternate and FTL collects loss 1.
pub fn make_ftl_breaker(horizon: usize) -> Result<MatrixEnv> {
    if horizon < 2 {
        return domain("FTL breaker needs T >= 2");
    }
    let rows = (1..=horizon)
        .map(|t| match t {
            1 => vec![0.5, 0.0],
            t if t % 2 == 0 => vec![0.0, 1.0],
            _ => vec![1.0, 0.0],
        })
        .collect();
    MatrixEnv::new(rows)
}

/// A loss matrix tailored to one deterministic UCB1 run.
#[derive(Debug, Clone)]
pub struct UcbBreaker {
    pub env: MatrixEnv,
    /// Arms UCB1 plays on this matrix, round by round.
    pub predicted: Vec<usize>,
    /// Arm with the largest reward total in hindsight.
    pub best_arm: usize,
}

/// Simulates UCB1 and hands the arm it is about to play a low reward while
/// every other arm gets a high one. Rewards avoid {0, 1} and never tie within
/// a round; arm 0 has the highest "high" level so it ends up the best arm.
pub fn make_ucb_breaker(horizon: usize, k: usize, param: UcbParam) -> Result<UcbBreaker> {
    if k < 2 || horizon < 2 * k {
        return domain("UCB breaker needs K >= 2 and T >= 2K");
    }
    const PHI: f64 = 0.618_033_988_749_894_9;
    let mut ucb = Ucb1::new(k, param)?;
    let mut rows = Vec::with_capacity(horizon);
    let mut predicted = Vec::with_capacity(horizon);
    let mut totals = vec![0.0; k];
    for t in 1..=horizon {
        let arm = ucb.choose(t);
        let wiggle = (t as f64 * PHI).fract();
        let rewards: Vec<f64> = (0..k)
            .map(|a| if a == arm { 0.05 + 0.04 * wiggle } else { 0.95 - 0.04 * a as f64 / k as f64 + 0.001 * wiggle })
            .collect();
        ucb.record(arm, rewards[arm]);
        for (s, r) in totals.iter_mut().zip(&rewards) {
            *s += r;
        }
        predicted.push(arm);
        rows.push(rewards.iter().map(|r| 1.0 - r).collect());
    }
    let best_arm = crate::online_policies::argmax_lowest(&totals);
    Ok(UcbBreaker { env: MatrixEnv::new(rows)?, predicted, best_arm })
}
