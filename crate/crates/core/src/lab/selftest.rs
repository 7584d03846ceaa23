//! Quick invariant sweep behind `lab selftest`.

use super::{aggregate, csv_string, parse_csv};
use crate::concentration::{kl_mgf_exact, mgf_lemma_check, MgfLemma};
use crate::divergences::{binary_kl, kl_inverse, pinsker_relaxations, Direction, ProbVec};
use crate::environments::{play, BernoulliEnv, Environment};
use crate::online_policies::{Hedge, Observation};
use crate::pac_bayes::{alternating_minimize, l2d_terms, LossTable};
use crate::rng::{rng_from, split};
use rand::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct SelfTestReport {
    /// (check name, passed, detail)
    pub checks: Vec<(String, bool, String)>,
}

impl SelfTestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.1)
    }
}

type Check = fn() -> Result<(), String>;

fn kl_inverse_round_trip() -> Result<(), String> {
    for i in 0..=50 {
        let p = i as f64 / 50.0;
        for eps in [1e-4, 0.01, 0.1, 1.0] {
            for dir in [Direction::Upper, Direction::Lower] {
                let q = kl_inverse(p, eps, dir).map_err(|e| e.to_string())?;
                // q brackets the level set: kl crosses eps within 1e-9 of q
                let (inner, outer) = match dir {
                    Direction::Upper => ((q - 1e-9).max(p), (q + 1e-9).min(1.0)),
                    Direction::Lower => ((q + 1e-9).min(p), (q - 1e-9).max(0.0)),
                };
                let kin = binary_kl(p, inner).map_err(|e| e.to_string())?;
                let kout = binary_kl(p, outer).map_err(|e| e.to_string())?;
                let at_edge = outer == 0.0 || outer == 1.0;
                if kin > eps * (1.0 + 1e-12) || (!at_edge && kout < eps * (1.0 - 1e-12)) {
                    return Err(format!("kl inverse of ({p}, {eps}) = {q} does not bracket the level"));
                }
            }
        }
    }
    Ok(())
}

fn relaxation_ordering() -> Result<(), String> {
    let eps = (100f64).ln() / 1000.0;
    for i in 0..=1000 {
        let p = i as f64 / 1000.0;
        let kl = kl_inverse(p, eps, Direction::Upper).map_err(|e| e.to_string())?;
        let r = pinsker_relaxations(p, eps).map_err(|e| e.to_string())?;
        if kl > r.plain + 1e-12 || kl > r.refined_upper + 1e-12 {
            return Err(format!("ordering fails at {p}"));
        }
    }
    Ok(())
}

fn kl_lemma_sandwich() -> Result<(), String> {
    for n in 1..=60u64 {
        for j in 1..=9 {
            let v = kl_mgf_exact(n, j as f64 / 10.0).map_err(|e| e.to_string())?;
            let s = (n as f64).sqrt();
            if v < s * (1.0 - 1e-9) || v > 2.0 * s * (1.0 + 1e-9) {
                return Err(format!("n = {n}, p = 0.{j}: {v}"));
            }
        }
    }
    Ok(())
}

fn hoeffding_lemma() -> Result<(), String> {
    let mut rng = rng_from(1);
    for _ in 0..300 {
        let k = rng.random_range(2..6);
        let w: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 1e-3).collect();
        let tot: f64 = w.iter().sum();
        let support: Vec<(f64, f64)> = w.iter().map(|x| (rng.random::<f64>() * 4.0 - 2.0, x / tot)).collect();
        let lambda = rng.random::<f64>() * 3.0;
        let (lhs, rhs) = mgf_lemma_check(&support, lambda, MgfLemma::Hoeffding).map_err(|e| e.to_string())?;
        if lhs > rhs * (1.0 + 1e-12) {
            return Err(format!("{lhs} > {rhs}"));
        }
    }
    Ok(())
}

fn regret_identity() -> Result<(), String> {
    let env = BernoulliEnv::new(vec![0.4, 0.5, 0.7], 3).map_err(|e| e.to_string())?;
    let mut h = Hedge::anytime(3, 2.0).map_err(|e| e.to_string())?;
    let tr = play(&env, &mut h, 500, Observation::Full, &mut rng_from(2), false).map_err(|e| e.to_string())?;
    let mut tot = [0.0; 3];
    let mut inc = 0.0;
    for t in 1..=500 {
        for (a, s) in tot.iter_mut().enumerate() {
            *s += env.loss(t, a);
        }
        inc += env.loss(t, tr.arms[t - 1]);
    }
    let best = tot.iter().cloned().fold(f64::INFINITY, f64::min);
    if *tr.regret.last().unwrap() != inc - best || tr.counts.iter().sum::<usize>() != 500 {
        return Err("incremental regret differs from recomputation".into());
    }
    Ok(())
}

fn tandem_identity() -> Result<(), String> {
    let mut rng = rng_from(4);
    for _ in 0..200 {
        let (m, n) = (rng.random_range(2..6), rng.random_range(1..20));
        let preds: Vec<i8> = (0..m * n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
        let labels: Vec<i8> = (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
        let t = LossTable::from_predictions(m, preds, &labels).map_err(|e| e.to_string())?;
        let rho = ProbVec::from_unnormalized((0..m).map(|_| rng.random::<f64>() + 0.01).collect())
            .map_err(|e| e.to_string())?;
        let l = l2d_terms(&t, &rho).map_err(|e| e.to_string())?;
        if (l.tandem - (l.gibbs_loss - l.disagreement / 2.0)).abs() > 1e-12 {
            return Err(format!("{l:?}"));
        }
    }
    Ok(())
}

fn alternating_monotone() -> Result<(), String> {
    let mut rng = rng_from(5);
    for _ in 0..20 {
        let mu: Vec<f64> = (0..20).map(|_| rng.random::<f64>() * 0.5).collect();
        let t = LossTable::bernoulli(&mu, 200, &mut rng).map_err(|e| e.to_string())?;
        let r = alternating_minimize(&ProbVec::uniform(20).unwrap(), &t, 0.05, 0).map_err(|e| e.to_string())?;
        if r.trace.windows(2).any(|w| w[1] > w[0] + 1e-12) {
            return Err(format!("trace increases: {:?}", r.trace));
        }
    }
    Ok(())
}

fn csv_round_trip() -> Result<(), String> {
    let mut rng = rng_from(6);
    let runs: Vec<Vec<f64>> = (0..3).map(|_| (0..50).map(|_| rng.random::<f64>() * 1e3).collect()).collect();
    let a = aggregate("x", (1..=50).map(|t| t as f64).collect(), &runs);
    let back = parse_csv(&csv_string(std::slice::from_ref(&a))).map_err(|e| e.to_string())?;
    for (u, v) in back[0].mean.iter().zip(&a.mean).chain(back[0].std.iter().zip(&a.std)) {
        if (u - v).abs() > 1e-11 * v.abs().max(1e-300) {
            return Err(format!("{u} != {v}"));
        }
    }
    Ok(())
}

fn seeds_split() -> Result<(), String> {
    if split(1, 2) == split(1, 3) || split(1, 2) != split(1, 2) {
        return Err("seed derivation".into());
    }
    Ok(())
}

pub fn selftest() -> SelfTestReport {
    let checks: [(&str, Check); 9] = [
        ("kl inverse round trip", kl_inverse_round_trip),
        ("kl below its relaxations", relaxation_ordering),
        ("kl lemma sandwich", kl_lemma_sandwich),
        ("hoeffding lemma", hoeffding_lemma),
        ("regret accounting", regret_identity),
        ("tandem decomposition", tandem_identity),
        ("alternating minimization descends", alternating_monotone),
        ("csv round trip", csv_round_trip),
        ("seed derivation", seeds_split),
    ];
    SelfTestReport {
        checks: checks
            .iter()
            .map(|(name, f)| match f() {
                Ok(()) => (name.to_string(), true, String::new()),
                Err(d) => (name.to_string(), false, d),
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    #[test]
    fn selftest_passes() {
        let r = super::selftest();
        assert!(r.passed(), "{:?}", r.checks);
    }
}
