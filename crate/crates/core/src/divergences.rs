//! Entropy, binary and categorical KL divergences, numerical inversion of the
//! binary kl, and its Pinsker-type relaxations. All logarithms are natural.

use crate::error::{check_unit, domain, Error, Result};

/// Information quantity in nats. May be `f64::INFINITY`.
pub type Nats = f64;

const NORM_TOL: f64 = 1e-9;
const BISECT_MAX_ITER: usize = 200;

/// A finite probability distribution. Sub-normalized vectors (Σ ≤ 1) are
/// allowed only through [`ProbVec::sub_normalized`] and carry a flag.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVec {
    weights: Vec<f64>,
    sub_normalized: bool,
}

impl ProbVec {
    /// Validates and renormalizes when the sum is within 1e-9 of one.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        check_weights(&weights)?;
        let s: f64 = weights.iter().sum();
        if (s - 1.0).abs() > NORM_TOL {
            return domain(format!("weights sum to {s}, not 1"));
        }
        let weights = weights.into_iter().map(|w| w / s).collect();
        Ok(Self { weights, sub_normalized: false })
    }

    /// Normalizes arbitrary nonnegative weights with positive total mass.
    pub fn from_unnormalized(weights: Vec<f64>) -> Result<Self> {
        check_weights(&weights)?;
        let s: f64 = weights.iter().sum();
        if !(s > 0.0) || !s.is_finite() {
            return domain(format!("total mass {s} is not positive and finite"));
        }
        let weights = weights.into_iter().map(|w| w / s).collect();
        Ok(Self { weights, sub_normalized: false })
    }

    /// A prior whose mass may be below one (e.g. a prefix-code prior).
    pub fn sub_normalized(weights: Vec<f64>) -> Result<Self> {
        check_weights(&weights)?;
        let s: f64 = weights.iter().sum();
        if s > 1.0 + NORM_TOL {
            return domain(format!("sub-normalized weights sum to {s} > 1"));
        }
        Ok(Self { weights, sub_normalized: true })
    }

    pub fn uniform(k: usize) -> Result<Self> {
        if k == 0 {
            return domain("uniform distribution over zero outcomes");
        }
        Ok(Self { weights: vec![1.0 / k as f64; k], sub_normalized: false })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn is_sub_normalized(&self) -> bool {
        self.sub_normalized
    }

    /// E_ρ[f] for per-outcome values `f`.
    pub fn expect(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// Index drawn by inverse-CDF sampling with one uniform draw.
    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_index(&self.weights, rng.random::<f64>())
    }

    /// Product distribution ρ ⊗ ρ' in row-major order.
    pub fn product(&self, other: &ProbVec) -> ProbVec {
        let mut w = Vec::with_capacity(self.len() * other.len());
        for a in &self.weights {
            for b in &other.weights {
                w.push(a * b);
            }
        }
        ProbVec { weights: w, sub_normalized: self.sub_normalized || other.sub_normalized }
    }
}

/// Smallest index whose cumulative weight exceeds `u`·total; never picks a
/// zero-weight entry.
pub(crate) fn sample_index(weights: &[f64], u: f64) -> usize {
    let total: f64 = weights.iter().sum();
    let target = u * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, w) in weights.iter().enumerate() {
        if *w > 0.0 {
            acc += w;
            last = i;
            if target < acc {
                return i;
            }
        }
    }
    last
}

fn check_weights(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return domain("empty distribution");
    }
    if let Some(w) = weights.iter().find(|w| w.is_nan() || **w < 0.0 || !w.is_finite()) {
        return domain(format!("invalid weight {w}"));
    }
    Ok(())
}

/// H(p) = −p ln p − (1−p) ln(1−p), with 0 ln 0 = 0.
pub fn binary_entropy(p: f64) -> Result<Nats> {
    check_unit("p", p)?;
    Ok(xlnx_neg(p) + xlnx_neg(1.0 - p))
}

fn xlnx_neg(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        -x * x.ln()
    }
}

/// a ln(a/b) with 0 ln(0/·) = 0 and a ln(a/0) = ∞ for a > 0.
fn kl_term(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else if b == 0.0 {
        f64::INFINITY
    } else {
        a * (a / b).ln()
    }
}

/// kl(p‖q) = p ln(p/q) + (1−p) ln((1−p)/(1−q)).
pub fn binary_kl(p: f64, q: f64) -> Result<Nats> {
    check_unit("p", p)?;
    check_unit("q", q)?;
    Ok(kl_unchecked(p, q))
}

#[inline]
pub(crate) fn kl_unchecked(p: f64, q: f64) -> f64 {
    (kl_term(p, q) + kl_term(1.0 - p, 1.0 - q)).max(0.0)
}

/// KL(ρ‖π) = Σ ρ_i ln(ρ_i/π_i).
pub fn categorical_kl(rho: &ProbVec, pi: &ProbVec) -> Result<Nats> {
    kl_weights(rho.weights(), pi.weights())
}

pub(crate) fn kl_weights(rho: &[f64], pi: &[f64]) -> Result<Nats> {
    if rho.len() != pi.len() {
        return Err(Error::LengthMismatch { expected: rho.len(), got: pi.len() });
    }
    let s: f64 = rho.iter().zip(pi).map(|(&r, &p)| kl_term(r, p)).sum();
    Ok(s.max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Upper,
    Lower,
}

/// Upper inverse max{q ≥ p̂ : kl(p̂‖q) ≤ ε} or lower inverse
/// min{q ≤ p̂ : kl(p̂‖q) ≤ ε}, by bisection.
pub fn kl_inverse(p_hat: f64, eps: Nats, direction: Direction) -> Result<f64> {
    check_unit("p_hat", p_hat)?;
    if eps.is_nan() || eps < 0.0 {
        return domain(format!("eps = {eps} must be nonnegative"));
    }
    Ok(kl_inverse_unchecked(p_hat, eps, direction))
}

pub(crate) fn kl_inverse_unchecked(p_hat: f64, eps: f64, direction: Direction) -> f64 {
    if eps == 0.0 {
        return p_hat;
    }
    match direction {
        Direction::Upper => {
            if eps == f64::INFINITY || p_hat == 1.0 {
                return 1.0;
            }
            if p_hat == 0.0 {
                // kl(0‖q) = −ln(1−q)
                return -(-eps).exp_m1();
            }
            bisect(p_hat, eps, p_hat, 1.0, true)
        }
        Direction::Lower => {
            if eps == f64::INFINITY || p_hat == 0.0 {
                return 0.0;
            }
            if p_hat == 1.0 {
                // kl(1‖q) = −ln q
                return (-eps).exp();
            }
            bisect(p_hat, eps, 0.0, p_hat, false)
        }
    }
}

/// Bisection on the monotone branch of q ↦ kl(p̂‖q). `lo`/`hi` bracket the
/// answer; the returned point always satisfies kl ≤ eps. Runs until the
/// bracket cannot be split further (well below 1e-11) or the iteration cap.
fn bisect(p_hat: f64, eps: f64, mut lo: f64, mut hi: f64, upper: bool) -> f64 {
    for _ in 0..BISECT_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let inside = kl_unchecked(p_hat, mid) <= eps;
        match (upper, inside) {
            (true, true) | (false, false) => lo = mid,
            _ => hi = mid,
        }
    }
    if upper {
        lo
    } else {
        hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PinskerRelaxations {
    pub plain: f64,
    pub refined_upper: f64,
    pub refined_lower: f64,
}

/// Closed-form relaxations of the kl inverses.
pub fn pinsker_relaxations(p_hat: f64, eps: Nats) -> Result<PinskerRelaxations> {
    check_unit("p_hat", p_hat)?;
    if eps.is_nan() || eps < 0.0 {
        return domain(format!("eps = {eps} must be nonnegative"));
    }
    let r = (2.0 * p_hat * eps).sqrt();
    Ok(PinskerRelaxations {
        plain: (p_hat + (eps / 2.0).sqrt()).min(1.0),
        refined_upper: (p_hat + r + 2.0 * eps).min(1.0),
        refined_lower: (p_hat - r).max(0.0),
    })
}

/// Bounds (lower, upper) on the binomial coefficient C(n, k) in terms of
/// e^{nH(k/n)}. The tight variant needs 1 ≤ k ≤ n−1.
pub fn binomial_entropy_bounds(n: u64, k: u64, tight: bool) -> Result<(f64, f64)> {
    if k > n || n == 0 {
        return domain(format!("need 0 <= k <= n and n >= 1, got n = {n}, k = {k}"));
    }
    let nf = n as f64;
    let kf = k as f64;
    let e = (nf * binary_entropy(kf / nf)?).exp();
    if !tight {
        return Ok((e / (nf + 1.0), e));
    }
    if k == 0 || k == n {
        return domain("tight binomial bounds need 1 <= k <= n-1");
    }
    let kk = kf * (nf - kf);
    let lower = 0.5 * (nf / (2.0 * kk)).sqrt() * e;
    let upper = (1.0 / (12.0 * nf)).exp() / (2.0 * std::f64::consts::PI).sqrt() * (nf / kk).sqrt() * e;
    Ok((lower, upper))
}
