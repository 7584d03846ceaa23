use super::PacBayesQuery;
use crate::concentration::{BoundResult, LambdaGrid, Method, SplitGrid};
use crate::divergences::{kl_inverse_unchecked, Direction, Nats};
use crate::error::{check_delta, check_unit, domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaSide {
    Upper { lambda: f64 },
    Lower { gamma: f64 },
}

pub(crate) fn ln_two_sqrt_n_over_delta(n: f64, delta: f64) -> f64 {
    (2.0 * n.sqrt() / delta).ln()
}

/// kl⁻¹⁺(Ê, (KL(ρ‖π) + ln(2√n/δ))/n).
pub fn pb_kl_bound(q: &PacBayesQuery, emp_loss: f64) -> Result<BoundResult> {
    check_unit("emp_loss", emp_loss)?;
    let kl = q.kl()?;
    let n = q.n as f64;
    let eps = (kl + ln_two_sqrt_n_over_delta(n, q.delta)) / n;
    let value = kl_inverse_unchecked(emp_loss, eps, Direction::Upper);
    Ok(BoundResult::new(value, q.delta, Method::PacBayesKl)?.with("kl", kl).with("eps", eps).with("emp_loss", emp_loss))
}

pub(crate) fn pb_lambda_upper_raw(emp: f64, kl: Nats, n: f64, log_term: f64, lambda: f64) -> f64 {
    let c = 1.0 - lambda / 2.0;
    emp / c + (kl + log_term) / (lambda * c * n)
}

/// Upper: Ê/(1−λ/2) + (KL + ln(2√n/δ))/(λ(1−λ/2)n);
/// lower: (1−γ/2)Ê − (KL + ln(2√n/δ))/(γn). Values are clipped to [0, 1]
/// with the raw value kept under `unclipped`.
pub fn pb_lambda_bound(q: &PacBayesQuery, emp_loss: f64, side: LambdaSide) -> Result<BoundResult> {
    check_unit("emp_loss", emp_loss)?;
    let kl = q.kl()?;
    let n = q.n as f64;
    let log_term = ln_two_sqrt_n_over_delta(n, q.delta);
    match side {
        LambdaSide::Upper { lambda } => {
            if !(lambda > 0.0 && lambda < 2.0) {
                return domain(format!("lambda = {lambda} outside (0, 2)"));
            }
            let v = pb_lambda_upper_raw(emp_loss, kl, n, log_term, lambda);
            Ok(BoundResult::new(v, q.delta, Method::PacBayesLambda)?
                .with("lambda", lambda)
                .with("kl", kl)
                .clip_unit(true))
        }
        LambdaSide::Lower { gamma } => {
            if !(gamma > 0.0) || !gamma.is_finite() {
                return domain(format!("gamma = {gamma} must be positive"));
            }
            let v = (1.0 - gamma / 2.0) * emp_loss - (kl + log_term) / (gamma * n);
            Ok(BoundResult::new(v, q.delta, Method::PacBayesLambdaLower)?
                .with("gamma", gamma)
                .with("kl", kl)
                .clip_unit(true))
        }
    }
}

/// λ* = 2/(√(2nÊ/(KL + ln(2√n/δ)) + 1) + 1), the minimizer of the upper
/// PAC-Bayes-λ bound for fixed ρ.
pub fn optimal_lambda(emp_loss: f64, kl_term: Nats, n: usize, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    if !(emp_loss >= 0.0) || !(kl_term >= 0.0) || n == 0 {
        return domain("optimal_lambda needs nonnegative inputs and n >= 1");
    }
    let nf = n as f64;
    Ok(optimal_lambda_raw(emp_loss, kl_term, nf, ln_two_sqrt_n_over_delta(nf, delta)))
}

pub(crate) fn optimal_lambda_raw(emp: f64, kl: f64, n: f64, log_term: f64) -> f64 {
    2.0 / ((2.0 * n * emp / (kl + log_term) + 1.0).sqrt() + 1.0)
}

/// b_0 + Σ_j α_j kl⁻¹⁺(E_ρ[F̂_{|j}], (KL + ln(2K√n/δ))/n).
pub fn pb_split_kl_bound(levels: &SplitGrid, means: &[f64], q: &PacBayesQuery) -> Result<BoundResult> {
    let k = levels.k();
    let n = q.n as f64;
    let log_term = (2.0 * k as f64 * n.sqrt() / q.delta).ln();
    pb_split_kl_raw(levels.points(), means, q.kl()?, n, log_term, q.delta)
}

/// Split-kl with an explicit confidence term; levels may repeat (α_j = 0).
pub(crate) fn pb_split_kl_raw(
    b: &[f64],
    means: &[f64],
    kl: f64,
    n: f64,
    log_term: f64,
    delta: f64,
) -> Result<BoundResult> {
    let k = b.len() - 1;
    if means.len() != k {
        return Err(Error::LengthMismatch { expected: k, got: means.len() });
    }
    for m in means {
        check_unit("level mean", *m)?;
    }
    let eps = (kl + log_term) / n;
    let mut value = b[0];
    for j in 0..k {
        value += (b[j + 1] - b[j]) * kl_inverse_unchecked(means[j], eps, Direction::Upper);
    }
    Ok(BoundResult::new(value, delta, Method::PacBayesSplitKl)?.with("kl", kl).with("eps", eps).with("k", k as f64))
}

/// Ê + min_λ (λ Ê_V + (KL + ln(k/δ))/(nλ)) over a grid in (0, ½].
pub fn pb_unexpected_bernstein_bound(
    q: &PacBayesQuery,
    emp_loss: f64,
    emp_sq_loss: f64,
    grid: &LambdaGrid,
) -> Result<BoundResult> {
    check_unit("emp_loss", emp_loss)?;
    check_unit("emp_sq_loss", emp_sq_loss)?;
    if let Some(l) = grid.lambdas().iter().find(|l| **l > 0.5) {
        return domain(format!("lambda {l} outside (0, 1/2]"));
    }
    let kl = q.kl()?;
    let n = q.n as f64;
    let log_term = (grid.k() as f64 / q.delta).ln();
    let (mut best, mut arg) = (f64::INFINITY, f64::NAN);
    for &l in grid.lambdas() {
        let v = emp_loss + l * emp_sq_loss + (kl + log_term) / (n * l);
        if v < best {
            best = v;
            arg = l;
        }
    }
    Ok(BoundResult::new(best, q.delta, Method::PacBayesUnexpectedBernstein)?
        .with("lambda", arg)
        .with("kl", kl)
        .clip_unit(true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concentration::{kl_mean_bound, KlVariant};
    use crate::divergences::{kl_unchecked, ProbVec};
    use crate::rng::rng_from;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng;

    fn query(rho: Vec<f64>, pi: Vec<f64>, n: usize, delta: f64) -> PacBayesQuery {
        PacBayesQuery::new(ProbVec::new(rho).unwrap(), ProbVec::new(pi).unwrap(), n, delta).unwrap()
    }

    #[test]
    fn pb_kl_examples() {
        let q = query(vec![0.5, 0.5], vec![0.5, 0.5], 500, 0.05);
        let a = pb_kl_bound(&q, 0.2).unwrap().value;
        let b = kl_mean_bound(0.2, 500, 0.05, KlVariant::ViaLemma, Direction::Upper).unwrap().value;
        assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        let q = query(vec![1.0, 0.0], vec![0.0, 1.0], 500, 0.05);
        assert_eq!(pb_kl_bound(&q, 0.2).unwrap().value, 1.0);

        let q = query(vec![0.1; 10], vec![0.1; 10], 1000, 0.05);
        let v = pb_kl_bound(&q, 0.1).unwrap().value;
        let eps = (2.0 * 1000f64.sqrt() / 0.05).ln() / 1000.0;
        let mut best = 0.1;
        let mut i = 0;
        while 0.1 + i as f64 * 1e-6 <= 1.0 {
            let x = 0.1 + i as f64 * 1e-6;
            if kl_unchecked(0.1, x) <= eps {
                best = x;
            }
            i += 1;
        }
        assert_abs_diff_eq!(v, best, epsilon = 1e-5);
    }

    #[test]
    fn pb_lambda_examples() {
        let q = query(vec![0.3, 0.7], vec![0.5, 0.5], 300, 0.05);
        for lambda in [0.1, 0.5, 1.0, 1.5] {
            let up = pb_lambda_bound(&q, 0.2, LambdaSide::Upper { lambda }).unwrap();
            assert!(up.get("unclipped").unwrap() >= pb_kl_bound(&q, 0.2).unwrap().value);
        }
        assert!(pb_lambda_bound(&q, 0.2, LambdaSide::Upper { lambda: 2.0 }).is_err());
        let low = pb_lambda_bound(&q, 0.2, LambdaSide::Lower { gamma: 1e-9 }).unwrap();
        assert_eq!(low.value, 0.0);
        assert!(low.get("unclipped").unwrap() < -1e3);
    }

    #[test]
    fn lambda_grid_oracle() {
        let n = 400.0;
        let lt = ln_two_sqrt_n_over_delta(n, 0.05);
        // Ê = 0, KL = 0: minimize over a fine grid and compare with λ* = 1
        let grid_best = (1..20000)
            .map(|i| i as f64 * 1e-4)
            .map(|l| (l, pb_lambda_upper_raw(0.0, 0.0, n, lt, l)))
            .fold((0.0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        assert_abs_diff_eq!(grid_best.0, optimal_lambda(0.0, 0.0, 400, 0.05).unwrap(), epsilon = 1e-4);
        let mut rng = rng_from(3);
        for _ in 0..20 {
            let (emp, kl) = (rng.random::<f64>() * 0.5, rng.random::<f64>() * 5.0);
            let lstar = optimal_lambda(emp, kl, 400, 0.05).unwrap();
            let at = pb_lambda_upper_raw(emp, kl, n, lt, lstar);
            for i in 1..10_000 {
                let l = i as f64 * 2e-4;
                assert!(pb_lambda_upper_raw(emp, kl, n, lt, l) >= at - 1e-12);
            }
        }
    }

    #[test]
    fn optimal_lambda_examples() {
        assert_eq!(optimal_lambda(0.0, 2.0, 100, 0.1).unwrap(), 1.0);
        let n = 100usize;
        let lt = ln_two_sqrt_n_over_delta(100.0, 0.1);
        let emp = 3.0 * (1.0 + lt) / (2.0 * n as f64);
        assert_abs_diff_eq!(optimal_lambda(emp, 1.0, n, 0.1).unwrap(), 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn split_kl_examples() {
        let q = query(vec![0.25; 4], vec![0.25; 4], 200, 0.05);
        let g = SplitGrid::new(vec![0.0, 1.0]).unwrap();
        let a = pb_split_kl_bound(&g, &[0.3], &q).unwrap().value;
        assert_abs_diff_eq!(a, pb_kl_bound(&q, 0.3).unwrap().value, epsilon = 1e-12);

        let gamma = 0.5;
        let g = SplitGrid::new(vec![-gamma, 0.0, 1.0 - gamma, 1.0]).unwrap();
        assert_eq!(g.alphas(), vec![0.5, 0.5, 0.5]);
        let v = pb_split_kl_bound(&g, &[0.0, 0.0, 0.0], &q).unwrap().value;
        let k = 3.0;
        let closed = -0.5 + 1.5 * (1.0 - (0.05 / (2.0 * k * 200f64.sqrt())).powf(1.0 / 200.0));
        assert_abs_diff_eq!(v, closed, epsilon = 1e-12);
        assert!(pb_split_kl_bound(&g, &[0.0, 0.0], &q).is_err());
    }

    #[test]
    fn unexpected_bernstein_examples() {
        let q = query(vec![1.0], vec![1.0], 100, 0.05);
        let g = LambdaGrid::new(vec![0.25]).unwrap();
        let b = pb_unexpected_bernstein_bound(&q, 0.1, 0.0, &g).unwrap();
        assert_abs_diff_eq!(b.value, 0.1 + (20f64).ln() / 25.0, epsilon = 1e-14);
        let g = LambdaGrid::new(vec![0.5, 0.25]).unwrap();
        // tie: 0.5 v + c/0.5 = 0.25 v + c/0.25  <=>  v = 4c
        let c = (2.0 / 0.05f64).ln() / 100.0;
        let b = pb_unexpected_bernstein_bound(&q, 0.1, 4.0 * c, &g).unwrap();
        assert_abs_diff_eq!(b.value, 0.1 + 0.5 * 4.0 * c + 2.0 * c, epsilon = 1e-14);
        assert!(pb_unexpected_bernstein_bound(&q, 0.1, 0.0, &LambdaGrid::new(vec![0.6]).unwrap()).is_err());
    }

    proptest! {
        #[test]
        fn ub_min_matches_exhaustive(emp in 0.0f64..1.0, v in 0.0f64..1.0, k in 1usize..6) {
            let q = query(vec![0.5, 0.5], vec![0.9, 0.1], 150, 0.1);
            let lambdas: Vec<f64> = (1..=k).map(|i| 0.5 / i as f64).collect();
            let g = LambdaGrid::new(lambdas.clone()).unwrap();
            let got = pb_unexpected_bernstein_bound(&q, emp, v, &g).unwrap();
            let kl = q.kl().unwrap();
            let best = lambdas.iter()
                .map(|l| emp + l * v + (kl + (k as f64 / 0.1).ln()) / (150.0 * l))
                .fold(f64::INFINITY, f64::min);
            prop_assert!((got.get("unclipped").unwrap_or(got.value) - best).abs() <= 1e-12);
        }

        #[test]
        fn split_kl_single_level_equals_pb_kl(emp in 0.0f64..=1.0, n in 1usize..2000) {
            let q = query(vec![0.2, 0.8], vec![0.5, 0.5], n, 0.05);
            let g = SplitGrid::new(vec![0.0, 1.0]).unwrap();
            let a = pb_split_kl_bound(&g, &[emp], &q).unwrap().value;
            let b = pb_kl_bound(&q, emp).unwrap().value;
            prop_assert!((a - b).abs() <= 1e-11);
        }
    }
}
