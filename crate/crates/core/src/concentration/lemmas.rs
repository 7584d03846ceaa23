use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MgfLemma {
    /// E e^{λZ} ≤ e^{λ EZ + λ²(b−a)²/8} for Z ∈ [a, b] (a, b = support extremes).
    Hoeffding,
    /// E e^{λZ} ≤ exp(λ²ν/(2(1 − bλ/3))) for EZ = 0, Z ≤ b, ν = EZ², λ ∈ [0, 3/b).
    Bernstein { b: f64 },
    /// E exp(λ(EX − X) + (bλ + ln(1 − bλ))/b² · X²) ≤ 1 for X ≤ b, λ ∈ [0, 1/b).
    Unexpected { b: f64 },
}

/// Exact left side and the lemma's right side for a finite distribution
/// given as (value, probability) pairs.
pub fn mgf_lemma_check(support: &[(f64, f64)], lambda: f64, lemma: MgfLemma) -> Result<(f64, f64)> {
    if support.is_empty() {
        return domain("empty support");
    }
    if support.iter().any(|(v, p)| !v.is_finite() || !(*p >= 0.0)) {
        return domain("support values must be finite with nonnegative probabilities");
    }
    let total: f64 = support.iter().map(|(_, p)| p).sum();
    if (total - 1.0).abs() > 1e-9 {
        return domain(format!("probabilities sum to {total}"));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return domain(format!("lambda = {lambda} must be nonnegative"));
    }
    let expect = |f: &dyn Fn(f64) -> f64| support.iter().map(|(v, p)| p * f(*v)).sum::<f64>();
    let mean = expect(&|x| x);
    match lemma {
        MgfLemma::Hoeffding => {
            let a = support.iter().map(|(v, _)| *v).fold(f64::INFINITY, f64::min);
            let b = support.iter().map(|(v, _)| *v).fold(f64::NEG_INFINITY, f64::max);
            let lhs = expect(&|x| (lambda * x).exp());
            let rhs = (lambda * mean + lambda * lambda * (b - a).powi(2) / 8.0).exp();
            Ok((lhs, rhs))
        }
        MgfLemma::Bernstein { b } => {
            if !(b > 0.0) || support.iter().any(|(v, _)| *v > b) {
                return domain("bernstein lemma needs b > 0 bounding the support");
            }
            if mean.abs() > 1e-9 {
                return domain(format!("bernstein lemma needs a zero mean, got {mean}"));
            }
            if lambda * b >= 3.0 {
                return domain("bernstein lemma needs lambda < 3/b");
            }
            let nu = expect(&|x| x * x);
            let lhs = expect(&|x| (lambda * x).exp());
            let rhs = (lambda * lambda * nu / (2.0 * (1.0 - b * lambda / 3.0))).exp();
            Ok((lhs, rhs))
        }
        MgfLemma::Unexpected { b } => {
            if !(b > 0.0) || support.iter().any(|(v, _)| *v > b) {
                return domain("unexpected bernstein lemma needs b > 0 bounding the support");
            }
            if lambda * b >= 1.0 {
                return domain("unexpected bernstein lemma needs lambda < 1/b");
            }
            let c = (b * lambda + (-b * lambda).ln_1p()) / (b * b);
            let lhs = expect(&|x| (lambda * (mean - x) + c * x * x).exp());
            Ok((lhs, 1.0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    #[test]
    fn lambda_zero_is_trivial() {
        let s = [(-0.5, 0.5), (0.5, 0.5)];
        for lemma in [MgfLemma::Hoeffding, MgfLemma::Bernstein { b: 1.0 }, MgfLemma::Unexpected { b: 1.0 }] {
            let (l, r) = mgf_lemma_check(&s, 0.0, lemma).unwrap();
            assert_abs_diff_eq!(l, 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(r, 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn hoeffding_examples() {
        let (l, r) = mgf_lemma_check(&[(-1.0, 0.5), (1.0, 0.5)], 1.0, MgfLemma::Hoeffding).unwrap();
        assert_abs_diff_eq!(l, 1.0f64.cosh(), epsilon = 1e-12);
        assert_abs_diff_eq!(r, 0.5f64.exp(), epsilon = 1e-12);
        let (l, r) = mgf_lemma_check(&[(0.0, 0.5), (1.0, 0.5)], 1.0, MgfLemma::Hoeffding).unwrap();
        assert_abs_diff_eq!(l, 1.85914, epsilon = 1e-5);
        assert_abs_diff_eq!(r, 0.625f64.exp(), epsilon = 1e-12);
    }

    #[test]
    fn range_violations() {
        let s = [(0.0, 0.5), (1.0, 0.5)];
        assert!(mgf_lemma_check(&s, 0.1, MgfLemma::Bernstein { b: 1.0 }).is_err());
        let z = [(-1.0, 0.5), (1.0, 0.5)];
        assert!(mgf_lemma_check(&z, 3.0, MgfLemma::Bernstein { b: 1.0 }).is_err());
        assert!(mgf_lemma_check(&z, 1.0, MgfLemma::Unexpected { b: 1.0 }).is_err());
        assert!(mgf_lemma_check(&z, 0.1, MgfLemma::Unexpected { b: 0.5 }).is_err());
    }

    fn random_support(rng: &mut crate::rng::SimRng, centered: bool) -> Vec<(f64, f64)> {
        let m = rng.random_range(1..6);
        let w: Vec<f64> = (0..m).map(|_| rng.random::<f64>() + 1e-3).collect();
        let s: f64 = w.iter().sum();
        let mut sup: Vec<(f64, f64)> = w.iter().map(|p| (rng.random_range(-1.0..1.0), p / s)).collect();
        if centered {
            let mean: f64 = sup.iter().map(|(v, p)| v * p).sum();
            for (v, _) in &mut sup {
                *v -= mean;
            }
        }
        sup
    }

    #[test]
    fn randomized_supports_satisfy_lemmas() {
        let mut rng = rng_from(17);
        for _ in 0..1000 {
            let s = random_support(&mut rng, false);
            let lambda = rng.random_range(0.0..4.0);
            let (l, r) = mgf_lemma_check(&s, lambda, MgfLemma::Hoeffding).unwrap();
            assert!(l <= r * (1.0 + 1e-12));

            let s = random_support(&mut rng, true);
            let b = s.iter().map(|(v, _)| *v).fold(0.0f64, f64::max).max(1e-3);
            let lambda = rng.random_range(0.0..1.0) * 3.0 / b * 0.999;
            let (l, r) = mgf_lemma_check(&s, lambda, MgfLemma::Bernstein { b }).unwrap();
            assert!(l <= r * (1.0 + 1e-12));

            let s = random_support(&mut rng, false);
            let b = s.iter().map(|(v, _)| *v).fold(0.0f64, f64::max).max(1e-3);
            let lambda = rng.random_range(0.0..1.0) / b * 0.999;
            let (l, r) = mgf_lemma_check(&s, lambda, MgfLemma::Unexpected { b }).unwrap();
            assert!(l <= r * (1.0 + 1e-12));
        }
    }
}
