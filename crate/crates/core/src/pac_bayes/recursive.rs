use super::bounds::pb_split_kl_raw;
use super::gibbs::minimize_core;
use super::LossTable;
use crate::concentration::{BoundResult, Method};
use crate::divergences::{kl_inverse_unchecked, kl_weights, Direction, ProbVec};
use crate::error::{check_delta, domain, Error, Result};
use crate::rng::{rng_from, split};

#[derive(Debug, Clone, PartialEq)]
pub struct RecursiveConfig {
    /// Number of stages T.
    pub stages: usize,
    /// γ_t for t = 1..T; γ_1 is unused.
    pub gammas: Vec<f64>,
    /// Master seed for the reference-hypothesis draws.
    pub seed: u64,
}

impl RecursiveConfig {
    /// T stages with γ_t = ½.
    pub fn new(stages: usize, seed: u64) -> Self {
        Self { stages, gammas: vec![0.5; stages], seed }
    }
}

/// One stage of the recursive decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct RecursiveStage {
    pub t: usize,
    /// |S_t|
    pub n_t: usize,
    /// |U_t^val| = |S_t ∪ … ∪ S_T|
    pub n_val: usize,
    pub gamma: f64,
    pub pi_star_prev: ProbVec,
    pub posterior: ProbVec,
    /// Excess-loss levels actually used (duplicates removed when γ ∈ {0, 1}).
    pub levels: Vec<f64>,
    /// Bound E_t on the excess loss (equals B_1 at t = 1).
    pub e_t: f64,
    /// B_t = E_t + γ_t B_{t−1}, a bound on E_{π_t}[L]. Not clipped, so that
    /// the recomposition identity is exact.
    pub bound: BoundResult,
}

/// Sizes |S_1|, …, |S_T|: S_T takes ⌈n/2⌉, S_{T−1} half of the rest
/// (rounded up), and S_1 the remainder.
pub fn geometric_split(n: usize, stages: usize) -> Result<Vec<usize>> {
    if stages == 0 {
        return domain("at least one stage is required");
    }
    let mut sizes = vec![0; stages];
    let mut rem = n;
    for t in (1..stages).rev() {
        sizes[t] = rem.div_ceil(2);
        rem -= sizes[t];
    }
    sizes[0] = rem;
    if sizes.contains(&0) {
        return domain(format!("n = {n} is too small for {stages} stages"));
    }
    Ok(sizes)
}

/// Recursive PAC-Bayes with the split-kl evaluation of excess losses.
/// Columns of the table are taken in order: S_1 first, S_T last.
pub fn recursive_pb(
    table: &LossTable,
    pi0: &ProbVec,
    delta: f64,
    config: &RecursiveConfig,
) -> Result<Vec<RecursiveStage>> {
    check_delta(delta)?;
    let (m, n) = (table.rows(), table.cols());
    if pi0.len() != m {
        return Err(Error::LengthMismatch { expected: m, got: pi0.len() });
    }
    let big_t = config.stages;
    if config.gammas.len() != big_t {
        return Err(Error::LengthMismatch { expected: big_t, got: config.gammas.len() });
    }
    if let Some(g) = config.gammas.iter().find(|g| !(0.0..=1.0).contains(*g)) {
        return domain(format!("gamma = {g} outside [0, 1]"));
    }
    let sizes = geometric_split(n, big_t)?;
    let mut starts = vec![0usize; big_t + 1];
    for t in 0..big_t {
        starts[t + 1] = starts[t] + sizes[t];
    }
    let tf = big_t as f64;
    let mut stages: Vec<RecursiveStage> = Vec::with_capacity(big_t);

    // stage 1: construction on S_1, evaluation on all of S
    let nf = n as f64;
    let log1 = (2.0 * tf * nf.sqrt() / delta).ln();
    let emp_s1 = column_means(table, starts[0], starts[1], |h, i| table.loss(h, i));
    let pi1 = minimize_core(pi0, &emp_s1, nf, log1)?.rho;
    let emp_all = column_means(table, 0, n, |h, i| table.loss(h, i));
    let kl1 = kl_weights(pi1.weights(), pi0.weights())?;
    let eps1 = (kl1 + log1) / nf;
    let b1 = kl_inverse_unchecked(pi1.expect(&emp_all), eps1, Direction::Upper);
    stages.push(RecursiveStage {
        t: 1,
        n_t: sizes[0],
        n_val: n,
        gamma: config.gammas[0],
        pi_star_prev: pi0.clone(),
        posterior: pi1.clone(),
        levels: vec![0.0, 1.0],
        e_t: b1,
        bound: BoundResult::new(b1, delta, Method::RecursivePacBayes)?
            .with("e_t", b1)
            .with("kl", kl1)
            .with("eps", eps1),
    });

    for t in 2..=big_t {
        let prev = stages[t - 2].posterior.clone();
        let prev_bound = stages[t - 2].bound.value;
        let gamma = config.gammas[t - 1];
        let (lo, hi) = (starts[t - 1], n);
        let n_val = hi - lo;
        let nv = n_val as f64;
        let mut rng = rng_from(split(config.seed, t as u64));
        let reference: Vec<usize> = (lo..hi).map(|_| prev.sample(&mut rng)).collect();
        let excess = |h: usize, i: usize| table.loss(h, i) - gamma * table.loss(reference[i - lo], i);
        let log_t = (6.0 * tf * nv.sqrt() / delta).ln();

        let shifted = column_means(table, lo, starts[t], |h, i| (excess(h, i) + gamma) / (1.0 + gamma));
        let post = minimize_core(&prev, &shifted, nv, log_t)?.rho;

        let mut levels = vec![-gamma, 0.0, 1.0 - gamma, 1.0];
        levels.dedup_by(|a, b| a == b);
        let k = levels.len() - 1;
        let mut per_h = vec![vec![0.0; k]; m];
        for (h, acc) in per_h.iter_mut().enumerate() {
            for i in lo..hi {
                let f = excess(h, i);
                for j in 0..k {
                    acc[j] += ((f - levels[j]) / (levels[j + 1] - levels[j])).clamp(0.0, 1.0);
                }
            }
            for a in acc.iter_mut() {
                *a /= nv;
            }
        }
        let means: Vec<f64> = (0..k)
            .map(|j| post.weights().iter().zip(&per_h).map(|(w, r)| w * r[j]).sum::<f64>().clamp(0.0, 1.0))
            .collect();
        let kl = kl_weights(post.weights(), prev.weights())?;
        let e = pb_split_kl_raw(&levels, &means, kl, nv, log_t, delta)?;
        let e_t = e.value;
        let b_t = e_t + gamma * prev_bound;
        let mut bound = BoundResult::new(b_t, delta, Method::RecursivePacBayes)?
            .with("e_t", e_t)
            .with("kl", kl)
            .with("eps", e.get("eps").unwrap_or(f64::NAN));
        for (j, v) in means.iter().enumerate() {
            bound = bound.with(&format!("f_hat_{}", j + 1), *v);
        }
        stages.push(RecursiveStage {
            t,
            n_t: sizes[t - 1],
            n_val,
            gamma,
            pi_star_prev: prev,
            posterior: post,
            levels,
            e_t,
            bound,
        });
    }
    Ok(stages)
}

fn column_means(table: &LossTable, lo: usize, hi: usize, f: impl Fn(usize, usize) -> f64) -> Vec<f64> {
    let c = (hi - lo) as f64;
    (0..table.rows()).map(|h| (lo..hi).map(|i| f(h, i)).sum::<f64>() / c).collect()
}
