//! Offline evaluation on logged bandit data collected by a uniform policy.
//!
//! Log format: ASCII, LF, `#` comment lines, a header line `K=<int>`, then
//! one record per line: action, reward, ten binary features.

use crate::error::{domain, Error, Result};
use crate::online_policies::{Feedback, Policy};
use crate::rng::{rng_from, SimRng};
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LogRecord {
    pub action: usize,
    pub reward: u8,
    pub features: [u8; 10],
}

/// Parses one record. `k` bounds the action id.
pub fn parse_log_line(line: &str, k: usize) -> Result<LogRecord> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    if tokens.len() != 12 {
        return Err(Error::Parse { line: 0, msg: format!("expected 12 fields, found {}", tokens.len()) });
    }
    let mut v = [0u64; 12];
    for (slot, tok) in v.iter_mut().zip(&tokens) {
        *slot = tok.parse().map_err(|_| Error::Parse { line: 0, msg: format!("not an integer: {tok:?}") })?;
    }
    if v[0] as usize >= k || v[0] > usize::MAX as u64 {
        return Err(Error::Parse { line: 0, msg: format!("action {} outside [0, {k})", v[0]) });
    }
    if v[1] > 1 {
        return Err(Error::Parse { line: 0, msg: format!("reward {} is not binary", v[1]) });
    }
    let mut features = [0u8; 10];
    for (f, x) in features.iter_mut().zip(&v[2..]) {
        if *x > 1 {
            return Err(Error::Parse { line: 0, msg: format!("feature {x} is not binary") });
        }
        *f = *x as u8;
    }
    Ok(LogRecord { action: v[0] as usize, reward: v[1] as u8, features })
}

/// Parses a whole log file; returns K and the records.
pub fn parse_log(text: &str) -> Result<(usize, Vec<LogRecord>)> {
    let mut k = None;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let at = |e: Error| match e {
            Error::Parse { msg, .. } => Error::Parse { line: i + 1, msg },
            other => other,
        };
        match k {
            None => {
                let v = line
                    .strip_prefix("K=")
                    .and_then(|s| s.trim().parse::<usize>().ok())
                    .filter(|v| *v > 0)
                    .ok_or_else(|| Error::Parse { line: i + 1, msg: "expected header K=<int>".into() })?;
                k = Some(v);
            }
            Some(kk) => out.push(parse_log_line(line, kk).map_err(at)?),
        }
    }
    let k = k.ok_or(Error::Parse { line: 0, msg: "missing K=<int> header".into() })?;
    Ok((k, out))
}

pub fn write_log(k: usize, records: &[LogRecord]) -> String {
    let mut s = format!("K={k}\n");
    for r in records {
        s.push_str(&format!("{} {}", r.action, r.reward));
        for f in r.features {
            s.push_str(&format!(" {f}"));
        }
        s.push('\n');
    }
    s
}

/// Uniformly logged records with Bernoulli(μ(a)) rewards and random features.
pub fn synthetic_log(reward_means: &[f64], n: usize, seed: u64) -> Result<Vec<LogRecord>> {
    if reward_means.is_empty() {
        return domain("need at least one arm");
    }
    for m in reward_means {
        crate::error::check_unit("mean", *m)?;
    }
    let mut rng = rng_from(seed);
    let k = reward_means.len();
    Ok((0..n)
        .map(|_| {
            let action = rng.random_range(0..k);
            let reward = (rng.random::<f64>() < reward_means[action]) as u8;
            let mut features = [0u8; 10];
            for f in &mut features {
                *f = rng.random_range(0..2);
            }
            LogRecord { action, reward, features }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReplayMode {
    ImportanceWeighted,
    RejectionSampling,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayTranscript {
    pub mode: ReplayMode,
    /// Arm played at each replayed round.
    pub arms: Vec<usize>,
    /// r̃ = K·r·1[match] for importance weighting, the logged reward for
    /// rejection sampling.
    pub rewards: Vec<f64>,
    /// Records read from the log.
    pub consumed: usize,
    /// Rounds the policy actually played.
    pub effective_horizon: usize,
}

impl ReplayTranscript {
    pub fn mean_reward(&self) -> f64 {
        if self.rewards.is_empty() {
            0.0
        } else {
            self.rewards.iter().sum::<f64>() / self.rewards.len() as f64
        }
    }

    /// Running average of the rewards.
    pub fn running_mean(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.rewards
            .iter()
            .enumerate()
            .map(|(i, r)| {
                acc += r;
                acc / (i + 1) as f64
            })
            .collect()
    }
}

fn check_arms(policy: &dyn Policy, k: usize) -> Result<()> {
    if policy.arms() != k {
        return Err(Error::LengthMismatch { expected: k, got: policy.arms() });
    }
    Ok(())
}

/// One round per record. The policy sees the loss (K − r̃)/K ∈ [0, 1]; for
/// UCB1 that is the same as running on r̃ with a K-times wider radius.
pub fn replay_importance_weighted(
    policy: &mut dyn Policy,
    log: &[LogRecord],
    k: usize,
    rng: &mut SimRng,
) -> Result<ReplayTranscript> {
    check_arms(policy, k)?;
    let kf = k as f64;
    let mut tr = ReplayTranscript {
        mode: ReplayMode::ImportanceWeighted,
        arms: Vec::with_capacity(log.len()),
        rewards: Vec::with_capacity(log.len()),
        consumed: 0,
        effective_horizon: 0,
    };
    for (i, rec) in log.iter().enumerate() {
        if rec.action >= k {
            return domain(format!("logged action {} outside [0, {k})", rec.action));
        }
        let d = policy.decide(i + 1, None, rng)?;
        let r_tilde = if d.arm == rec.action { kf * rec.reward as f64 } else { 0.0 };
        policy.update(&Feedback::Bandit { arm: d.arm, loss: (kf - r_tilde) / kf })?;
        tr.arms.push(d.arm);
        tr.rewards.push(r_tilde);
    }
    tr.consumed = log.len();
    tr.effective_horizon = log.len();
    Ok(tr)
}

/// Holds the policy's choice and scrolls until a record with that action
/// turns up; only matching records become rounds.
pub fn replay_rejection_sampling(
    policy: &mut dyn Policy,
    log: &[LogRecord],
    k: usize,
    rng: &mut SimRng,
) -> Result<ReplayTranscript> {
    check_arms(policy, k)?;
    let mut tr = ReplayTranscript {
        mode: ReplayMode::RejectionSampling,
        arms: Vec::new(),
        rewards: Vec::new(),
        consumed: 0,
        effective_horizon: 0,
    };
    let mut pending = None;
    for rec in log {
        if rec.action >= k {
            return domain(format!("logged action {} outside [0, {k})", rec.action));
        }
        tr.consumed += 1;
        let arm = match pending {
            Some(a) => a,
            None => {
                let a = policy.decide(tr.effective_horizon + 1, None, rng)?.arm;
                pending = Some(a);
                a
            }
        };
        if arm != rec.action {
            continue;
        }
        pending = None;
        let r = rec.reward as f64;
        policy.update(&Feedback::Bandit { arm, loss: 1.0 - r })?;
        tr.arms.push(arm);
        tr.rewards.push(r);
        tr.effective_horizon += 1;
    }
    Ok(tr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::online_policies::{FixedArm, Ucb1, UcbParam};

    #[test]
    fn parse_examples() {
        let r = parse_log_line("7 0 1 0 0 1 0 1 0 0 1 0", 16).unwrap();
        assert_eq!((r.action, r.reward), (7, 0));
        assert_eq!(r.features, [1, 0, 0, 1, 0, 1, 0, 0, 1, 0]);
        let r = parse_log_line("0 1 0 0 0 0 0 0 0 0 0 0", 16).unwrap();
        assert_eq!((r.action, r.reward), (0, 1));
        assert!(parse_log_line("1 2 0 0 0 0 0 0 0 0 0 0", 16).is_err());
        assert!(parse_log_line("1 0 0 0", 16).is_err());
        assert!(parse_log_line("1 0 0 0 0 0 0 0 0 0 0 x", 16).is_err());
        assert!(parse_log_line("16 0 0 0 0 0 0 0 0 0 0 0", 16).is_err());
    }

    #[test]
    fn file_round_trip() {
        let recs = synthetic_log(&[0.1, 0.9, 0.5], 50, 3).unwrap();
        let text = format!("# comment\n{}", write_log(3, &recs));
        assert_eq!(parse_log(&text).unwrap(), (3, recs));
        assert!(parse_log("0 1 0 0 0 0 0 0 0 0 0 0\n").is_err());
        match parse_log("K=2\n0 1 0 0 0 0 0 0 0 0 0 0\n5 1 0 0 0 0 0 0 0 0 0 0\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn iw_single_records() {
        let rec = parse_log_line("3 1 0 0 0 0 0 0 0 0 0 0", 16).unwrap();
        let mut hit = FixedArm::new(16, 3).unwrap();
        let tr = replay_importance_weighted(&mut hit, &[rec], 16, &mut rng_from(0)).unwrap();
        assert_eq!(tr.rewards, vec![16.0]);
        let mut miss = FixedArm::new(16, 4).unwrap();
        let tr = replay_importance_weighted(&mut miss, &[rec], 16, &mut rng_from(0)).unwrap();
        assert_eq!(tr.rewards, vec![0.0]);
    }

    #[test]
    fn iw_unbiased_by_enumeration() {
        // E over the uniformly logged action of K·r·1[match] equals r(policy arm).
        for k in 1..=8usize {
            let r: Vec<f64> = (0..k).map(|a| ((a * 5 + 1) % 3) as f64 / 2.0).collect();
            for arm in 0..k {
                let e: f64 =
                    (0..k).map(|logged| if logged == arm { k as f64 * r[logged] } else { 0.0 }).sum::<f64>() / k as f64;
                assert!((e - r[arm]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn iw_fixed_policy_value() {
        let means: Vec<f64> = (0..16).map(|a| 0.02 + 0.005 * a as f64).collect();
        let log = synthetic_log(&means, 100_000, 2).unwrap();
        let mut p = FixedArm::new(16, 9).unwrap();
        let tr = replay_importance_weighted(&mut p, &log, 16, &mut rng_from(0)).unwrap();
        let n = tr.rewards.len() as f64;
        let m = tr.mean_reward();
        let var = tr.rewards.iter().map(|r| (r - m).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((m - means[9]).abs() <= 3.0 * (var / n).sqrt());
    }

    #[test]
    fn rs_all_matching() {
        let log = vec![parse_log_line("1 1 0 0 0 0 0 0 0 0 0 0", 2).unwrap(); 30];
        let mut p = FixedArm::new(2, 1).unwrap();
        let tr = replay_rejection_sampling(&mut p, &log, 2, &mut rng_from(0)).unwrap();
        assert_eq!((tr.effective_horizon, tr.consumed), (30, 30));
    }

    #[test]
    fn rs_effective_horizon() {
        let log = synthetic_log(&[0.5, 0.5], 1000, 5).unwrap();
        let mut p = Ucb1::new(2, UcbParam::Improved).unwrap();
        let tr = replay_rejection_sampling(&mut p, &log, 2, &mut rng_from(0)).unwrap();
        assert!((tr.effective_horizon as f64 - 500.0).abs() <= 3.0 * 250f64.sqrt());
        assert!(replay_rejection_sampling(&mut p, &[], 2, &mut rng_from(0)).unwrap().arms.is_empty());
    }
}
