use super::{check_n, BoundResult, Method, Sample, SplitGrid};
use crate::divergences::{kl_inverse_unchecked, kl_unchecked, Direction};
use crate::error::{check_delta, check_unit, domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KlVariant {
    /// budget ln(1/δ)/n
    Direct,
    /// budget ln(2√n/δ)/n
    ViaLemma,
}

/// Bound on the mean of [0,1]-valued i.i.d. variables from the empirical
/// mean by inverting the binary kl.
pub fn kl_mean_bound(p_hat: f64, n: u64, delta: f64, variant: KlVariant, direction: Direction) -> Result<BoundResult> {
    check_unit("p_hat", p_hat)?;
    check_n(n)?;
    check_delta(delta)?;
    let nf = n as f64;
    let (eps, method) = match variant {
        KlVariant::Direct => ((1.0 / delta).ln() / nf, Method::Kl),
        KlVariant::ViaLemma => ((2.0 * nf.sqrt() / delta).ln() / nf, Method::KlViaLemma),
    };
    let value = kl_inverse_unchecked(p_hat, eps, direction);
    Ok(BoundResult::new(value, delta, method)?.with("eps", eps).with("p_hat", p_hat))
}

/// Split-kl bound: b_0 + Σ_j α_j kl⁻¹⁺(p̂_{|j}, ln(K/δ)/n).
pub fn split_kl_mean_bound(sample: &Sample, grid: &SplitGrid, delta: f64) -> Result<BoundResult> {
    check_delta(delta)?;
    let b = grid.points();
    let (lo, hi) = (b[0], b[b.len() - 1]);
    if let Some(v) = sample.values().iter().find(|v| **v < lo || **v > hi) {
        return domain(format!("sample value {v} outside the grid range [{lo}, {hi}]"));
    }
    let k = grid.k();
    let n = sample.len() as f64;
    let mut p_hats = vec![0.0; k];
    for &x in sample.values() {
        for (acc, part) in p_hats.iter_mut().zip(grid.decompose(x)) {
            *acc += part;
        }
    }
    for p in &mut p_hats {
        *p = (*p / n).clamp(0.0, 1.0);
    }
    let eps = (k as f64 / delta).ln() / n;
    let mut value = lo;
    for (alpha, &p) in grid.alphas().iter().zip(&p_hats) {
        value += alpha * kl_inverse_unchecked(p, eps, Direction::Upper);
    }
    let mut out = BoundResult::new(value, delta, Method::SplitKl)?
        .with("eps", eps)
        .with("k", k as f64)
        .with("mean", sample.mean());
    for (j, p) in p_hats.iter().enumerate() {
        out = out.with(&format!("p_hat_{}", j + 1), *p);
    }
    Ok(out.clip_unit(sample.is_unit()))
}

/// E[e^{n kl(p̂‖p)}] for p̂ the mean of n Bernoulli(p) draws, by exact
/// summation over the binomial distribution in log space.
pub fn kl_mgf_exact(n: u64, p: f64) -> Result<f64> {
    check_n(n)?;
    check_unit("p", p)?;
    if p == 0.0 || p == 1.0 {
        return Ok(1.0);
    }
    let nf = n as f64;
    let mut log_fact = Vec::with_capacity(n as usize + 1);
    log_fact.push(0.0f64);
    for i in 1..=n {
        let prev = log_fact[i as usize - 1];
        log_fact.push(prev + (i as f64).ln());
    }
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let terms: Vec<f64> = (0..=n)
        .map(|k| {
            let kf = k as f64;
            let log_choose = log_fact[n as usize] - log_fact[k as usize] - log_fact[(n - k) as usize];
            log_choose + kf * lp + (nf - kf) * lq + nf * kl_unchecked(kf / nf, p)
        })
        .collect();
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(m.exp() * terms.iter().map(|t| (t - m).exp()).sum::<f64>())
}
