use super::bounds::{ln_two_sqrt_n_over_delta, optimal_lambda_raw, pb_lambda_upper_raw};
use super::LossTable;
use crate::divergences::{kl_weights, ProbVec};
use crate::error::{check_delta, domain, Error, Result};

const REL_TOL: f64 = 1e-9;
const MAX_ITER: usize = 1000;

/// ρ(h) ∝ π(h) e^{−scale (loss(h) − min loss)}, the minimizer of
/// scale·E_ρ[loss] + KL(ρ‖π). The minimum runs over the support of π.
pub fn gibbs_posterior(pi: &ProbVec, losses: &[f64], scale: f64) -> Result<ProbVec> {
    if losses.len() != pi.len() {
        return Err(Error::LengthMismatch { expected: pi.len(), got: losses.len() });
    }
    if !(scale >= 0.0) || !scale.is_finite() {
        return domain(format!("scale = {scale} must be nonnegative"));
    }
    if losses.iter().any(|l| !l.is_finite()) {
        return domain("losses must be finite");
    }
    let min = pi.weights().iter().zip(losses).filter(|(w, _)| **w > 0.0).map(|(_, l)| *l).fold(f64::INFINITY, f64::min);
    if min == f64::INFINITY {
        return domain("prior has no mass");
    }
    let w: Vec<f64> = pi
        .weights()
        .iter()
        .zip(losses)
        .map(|(p, l)| if *p > 0.0 { p * (-scale * (l - min)).exp() } else { 0.0 })
        .collect();
    ProbVec::from_unnormalized(w)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AltMinResult {
    pub rho: ProbVec,
    pub lambda: f64,
    /// PAC-Bayes-λ upper bound at (ρ, λ), not clipped.
    pub bound: f64,
    /// Bound after initialization and after every full update.
    pub trace: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub iterations: usize,
}

/// Minimizes the PAC-Bayes-λ upper bound by alternating the Gibbs posterior
/// (scale λ·n_eff) and the closed-form λ. With r > 0 the table must carry
/// validation masks of size n − r and the bound is taken with n − r.
pub fn alternating_minimize(pi: &ProbVec, table: &LossTable, delta: f64, r: usize) -> Result<AltMinResult> {
    check_delta(delta)?;
    if pi.len() != table.rows() {
        return Err(Error::LengthMismatch { expected: table.rows(), got: pi.len() });
    }
    let (emp, n_eff) = if r == 0 {
        let n = table.cols() as f64;
        let emp = (0..table.rows()).map(|h| table.row(h).iter().sum::<f64>() / n).collect();
        (emp, table.cols())
    } else {
        if table.masks().is_none() {
            return domain("aggregation with r > 0 needs validation masks");
        }
        if r >= table.cols() {
            return domain("r must be smaller than n");
        }
        let n_val = table.cols() - r;
        if (0..table.rows()).any(|h| table.count(h) != n_val) {
            return domain(format!("every validation mask must select n - r = {n_val} examples"));
        }
        (table.empirical_losses(), n_val)
    };
    let n = n_eff as f64;
    minimize_core(pi, &emp, n, ln_two_sqrt_n_over_delta(n, delta))
}

/// Alternating minimization for given empirical losses, denominator `n` and
/// confidence term `log_term` (ln(2√n/δ) for the plain bound).
pub(crate) fn minimize_core(pi: &ProbVec, emp: &[f64], n: f64, log_term: f64) -> Result<AltMinResult> {
    let mut rho = pi.clone();
    let e = rho.expect(emp);
    let mut lambda = optimal_lambda_raw(e, 0.0, n, log_term);
    let mut bound = pb_lambda_upper_raw(e, 0.0, n, log_term, lambda);
    let mut trace = vec![bound];
    let mut lambdas = vec![lambda];
    let mut iterations = 0;
    while iterations < MAX_ITER {
        iterations += 1;
        let next_rho = gibbs_posterior(pi, emp, lambda * n)?;
        let next_kl = kl_weights(next_rho.weights(), pi.weights())?;
        let next_e = next_rho.expect(emp);
        let next_lambda = optimal_lambda_raw(next_e, next_kl, n, log_term);
        let next = pb_lambda_upper_raw(next_e, next_kl, n, log_term, next_lambda);
        if next > bound {
            // rounding noise at a fixed point
            break;
        }
        let rel = (bound - next) / bound.abs().max(f64::MIN_POSITIVE);
        rho = next_rho;
        lambda = next_lambda;
        bound = next;
        trace.push(bound);
        lambdas.push(lambda);
        if rel < REL_TOL {
            break;
        }
    }
    Ok(AltMinResult { rho, lambda, bound, trace, lambdas, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pac_bayes::{pb_lambda_bound, LambdaSide, PacBayesQuery};
    use crate::rng::rng_from;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn gibbs_examples() {
        let pi = ProbVec::new(vec![0.2, 0.3, 0.5]).unwrap();
        assert_eq!(gibbs_posterior(&pi, &[0.1, 0.5, 0.9], 0.0).unwrap(), pi);
        let u = ProbVec::uniform(2).unwrap();
        let r = gibbs_posterior(&u, &[0.0, 1.0], 3f64.ln()).unwrap();
        assert_abs_diff_eq!(r.weights()[0], 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(r.weights()[1], 0.25, epsilon = 1e-15);
        assert!(gibbs_posterior(&u, &[0.0], 1.0).is_err());
    }

    fn objective(rho: &[f64], pi: &ProbVec, losses: &[f64], scale: f64) -> f64 {
        let e: f64 = rho.iter().zip(losses).map(|(r, l)| r * l).sum();
        scale * e + kl_weights(rho, pi.weights()).unwrap()
    }

    #[test]
    fn gibbs_is_first_order_optimal() {
        let mut rng = rng_from(8);
        let pi = ProbVec::from_unnormalized((0..6).map(|_| rng.random::<f64>() + 0.1).collect()).unwrap();
        let losses: Vec<f64> = (0..6).map(|_| rng.random::<f64>()).collect();
        let rho = gibbs_posterior(&pi, &losses, 7.0).unwrap();
        let base = objective(rho.weights(), &pi, &losses, 7.0);
        for _ in 0..100 {
            let dir: Vec<f64> = (0..6).map(|_| rng.random::<f64>()).collect();
            let s: f64 = dir.iter().sum();
            let p: Vec<f64> = rho.weights().iter().zip(&dir).map(|(r, d)| 0.999 * r + 1e-3 * d / s).collect();
            assert!(objective(&p, &pi, &losses, 7.0) >= base - 1e-12);
        }
    }

    #[test]
    fn single_hypothesis() {
        let pi = ProbVec::uniform(1).unwrap();
        let t = LossTable::new(1, 5, vec![0.0, 1.0, 0.0, 1.0, 1.0]).unwrap();
        let r = alternating_minimize(&pi, &t, 0.05, 0).unwrap();
        assert_eq!(r.rho.weights(), &[1.0]);
        let q = PacBayesQuery::new(pi.clone(), pi, 5, 0.05).unwrap();
        let b = pb_lambda_bound(&q, 0.6, LambdaSide::Upper { lambda: r.lambda }).unwrap();
        assert_abs_diff_eq!(b.get("unclipped").unwrap(), r.bound, epsilon = 1e-14);
    }

    #[test]
    fn identical_rows_keep_prior() {
        let pi = ProbVec::new(vec![0.1, 0.6, 0.3]).unwrap();
        let row = [0.0, 1.0, 1.0, 0.0, 0.5];
        let t = LossTable::new(3, 5, row.repeat(3)).unwrap();
        let r = alternating_minimize(&pi, &t, 0.05, 0).unwrap();
        for (a, b) in r.rho.weights().iter().zip(pi.weights()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn aggregation_uses_validation_losses() {
        let t = LossTable::new(2, 4, vec![1., 0., 0., 0., 0., 1., 1., 1.]).unwrap();
        let pi = ProbVec::uniform(2).unwrap();
        assert!(alternating_minimize(&pi, &t, 0.05, 1).is_err());
        let t = t.with_masks(vec![vec![false, true, true, true], vec![true, false, true, true]]).unwrap();
        let r = alternating_minimize(&pi, &t, 0.05, 1).unwrap();
        assert!(r.rho.weights()[0] > r.rho.weights()[1]);
        let t2 = t.clone().with_masks(vec![vec![false, true, true, true], vec![true, true, true, true]]).unwrap();
        assert!(alternating_minimize(&pi, &t2, 0.05, 1).is_err());
    }

    proptest! {
        #[test]
        fn shift_invariance(ks in proptest::collection::vec(0u32..1024, 2..8), c in 0u32..1024, scale in 0.0f64..50.0) {
            let losses: Vec<f64> = ks.iter().map(|k| *k as f64 / 1024.0).collect();
            let shifted: Vec<f64> = losses.iter().map(|l| l + c as f64 / 1024.0).collect();
            let pi = ProbVec::uniform(losses.len()).unwrap();
            let a = gibbs_posterior(&pi, &losses, scale).unwrap();
            let b = gibbs_posterior(&pi, &shifted, scale).unwrap();
            prop_assert_eq!(a.weights(), b.weights());
        }

        #[test]
        fn trace_nonincreasing(seed in 0u64..1000) {
            let mut rng = rng_from(seed);
            let (m, n) = (8, 60);
            let means: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
            let t = LossTable::bernoulli(&means, n, &mut rng).unwrap();
            let pi = ProbVec::uniform(m).unwrap();
            let r = alternating_minimize(&pi, &t, 0.05, 0).unwrap();
            prop_assert!(r.trace.windows(2).all(|w| w[1] <= w[0] + 1e-12));
            prop_assert!(r.lambdas.iter().all(|l| *l > 0.0 && *l <= 1.0));
            prop_assert!(r.bound <= r.trace[0]);
        }
    }
}
