use super::{check_n, BoundResult, Method, Sample};
use crate::error::{check_delta, domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dual {
    /// f(x) = 1 + x − √(1 + 2x)
    F,
    /// f⁻¹(x) = x + √(2x)
    FInv,
}

/// A decreasing grid of positive λ values for bounds that optimize over λ.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaGrid {
    lambdas: Vec<f64>,
}

impl LambdaGrid {
    pub fn new(lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() {
            return domain("empty lambda grid");
        }
        if lambdas.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
            return domain("lambda grid values must be positive and finite");
        }
        if lambdas.windows(2).any(|w| w[1] >= w[0]) {
            return domain("lambda grid must be strictly decreasing");
        }
        Ok(Self { lambdas })
    }

    /// {1/(2b), 1/(4b), …, 1/(2^k b)} with k = ⌈log₂(√(n/ln(1/δ))/2)⌉, k ≥ 1.
    pub fn default_for(n: u64, delta: f64, b: f64) -> Result<Self> {
        check_n(n)?;
        check_delta(delta)?;
        if !(b > 0.0) || !b.is_finite() {
            return domain(format!("b = {b} must be positive"));
        }
        let k = default_k(n, delta);
        Self::new((1..=k).map(|i| 1.0 / (2f64.powi(i as i32) * b)).collect())
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn k(&self) -> usize {
        self.lambdas.len()
    }
}

pub(crate) fn default_k(n: u64, delta: f64) -> usize {
    let x = ((n as f64 / (1.0 / delta).ln()).sqrt() / 2.0).log2().ceil();
    if x.is_finite() && x >= 1.0 {
        x as usize
    } else {
        1
    }
}

/// ψ(u) = u − ln(1 + u), for u > −1.
pub fn psi(u: f64) -> Result<f64> {
    if !(u > -1.0) {
        return domain(format!("psi needs u > -1, got {u}"));
    }
    Ok(u - u.ln_1p())
}

/// mean_hat + √(2ν ln(1/δ)/n) + b ln(1/δ)/(3n).
pub fn bernstein_mean_bound(mean_hat: f64, nu: f64, b: f64, n: u64, delta: f64) -> Result<BoundResult> {
    check_n(n)?;
    check_delta(delta)?;
    if !(nu >= 0.0) || !(b > 0.0) || !mean_hat.is_finite() {
        return domain("bernstein needs nu >= 0, b > 0 and a finite mean");
    }
    let l = (1.0 / delta).ln();
    let nf = n as f64;
    let value = mean_hat + (2.0 * nu * l / nf).sqrt() + b * l / (3.0 * nf);
    Ok(BoundResult::new(value, delta, Method::Bernstein)?.with("nu", nu).with("b", b))
}

pub fn bernstein_duals(x: f64, direction: Dual) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return domain(format!("x = {x} must be nonnegative"));
    }
    Ok(match direction {
        Dual::F => 1.0 + x - (1.0 + 2.0 * x).sqrt(),
        Dual::FInv => x + (2.0 * x).sqrt(),
    })
}

/// Empirical Bernstein bound for [0,1]-valued samples with the unbiased
/// variance estimate ν̂ = (n/(n−1))(s̄ − p̂²).
pub fn empirical_bernstein_mean_bound(sample: &Sample, delta: f64) -> Result<BoundResult> {
    check_delta(delta)?;
    if !sample.is_unit() {
        return domain("empirical bernstein needs a [0, 1]-valued sample");
    }
    let n = sample.len();
    if n < 2 {
        return domain("empirical bernstein needs at least two samples");
    }
    let nf = n as f64;
    let p = sample.mean();
    // (n/(n−1))(s̄ − p̂²) evaluated on values shifted by X_1, which leaves it
    // unchanged and avoids cancellation (a constant sample gives exactly 0)
    let x0 = sample.values()[0];
    let (mut s1, mut s2) = (0.0, 0.0);
    for &x in sample.values() {
        let y = x - x0;
        s1 += y;
        s2 += y * y;
    }
    let (m1, m2) = (s1 / nf, s2 / nf);
    let nu = (nf / (nf - 1.0) * (m2 - m1 * m1)).max(0.0);
    let l = (2.0 / delta).ln();
    let value = p + (2.0 * nu * l / nf).sqrt() + 7.0 * l / (3.0 * (nf - 1.0));
    Ok(BoundResult::new(value, delta, Method::EmpiricalBernstein)?.with("nu_hat", nu).with("mean", p).clip_unit(true))
}

/// min over λ in the grid of p̂ + ψ(−λb)/(λb²)·ŝ + ln(k/δ)/(λn).
pub fn unexpected_bernstein_mean_bound(sample: &Sample, delta: f64, grid: &LambdaGrid) -> Result<BoundResult> {
    check_delta(delta)?;
    let b = sample.upper();
    if !(b > 0.0) {
        return domain("unexpected bernstein needs an upper bound b > 0");
    }
    if let Some(l) = grid.lambdas().iter().find(|l| **l * b >= 1.0) {
        return domain(format!("lambda {l} is not below 1/b = {}", 1.0 / b));
    }
    let n = sample.len() as f64;
    let k = grid.k() as f64;
    let (p, s) = (sample.mean(), sample.mean_of_squares());
    let log_term = (k / delta).ln();
    let (mut best, mut best_lambda) = (f64::INFINITY, f64::NAN);
    for &lambda in grid.lambdas() {
        let v = p + psi(-lambda * b)? / (lambda * b * b) * s + log_term / (lambda * n);
        if v < best {
            best = v;
            best_lambda = lambda;
        }
    }
    Ok(BoundResult::new(best, delta, Method::UnexpectedBernstein)?
        .with("lambda", best_lambda)
        .with("k", k)
        .with("mean", p)
        .with("mean_sq", s)
        .clip_unit(sample.is_unit()))
}
