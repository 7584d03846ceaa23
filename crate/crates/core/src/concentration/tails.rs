use super::{check_n, BoundResult, Method, Sample};
use crate::error::{check_delta, domain, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tail {
    /// P[X ≥ ε] ≤ E[X]/ε for nonnegative X.
    Markov { mean: f64, eps: f64 },
    /// P[|X − EX| ≥ ε] ≤ Var[X]/ε².
    Chebyshev { variance: f64, eps: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sides {
    One,
    Two,
}

impl Sides {
    fn count(self) -> f64 {
        match self {
            Sides::One => 1.0,
            Sides::Two => 2.0,
        }
    }
}

/// Tail probability bound, clipped to [0, 1].
pub fn markov_chebyshev_tail(tail: Tail) -> Result<f64> {
    let (num, eps, power) = match tail {
        Tail::Markov { mean, eps } => {
            if !(mean >= 0.0) {
                return domain(format!("markov needs a nonnegative mean, got {mean}"));
            }
            (mean, eps, 1)
        }
        Tail::Chebyshev { variance, eps } => {
            if !(variance >= 0.0) {
                return domain(format!("variance {variance} must be nonnegative"));
            }
            (variance, eps, 2)
        }
    };
    if !(eps > 0.0) {
        return domain(format!("eps = {eps} must be positive"));
    }
    Ok((num / eps.powi(power)).min(1.0))
}

/// Deviation ε such that P[p̂ − p ≥ ε] ≤ δ (one side) or P[|p̂ − p| ≥ ε] ≤ δ.
pub fn hoeffding_radius(n: u64, delta: f64, sides: Sides) -> Result<f64> {
    check_n(n)?;
    check_delta(delta)?;
    Ok(((sides.count() / delta).ln() / (2.0 * n as f64)).sqrt())
}

/// Smallest n whose Hoeffding radius is at most `eps`.
pub fn hoeffding_solve_n(eps: f64, delta: f64, sides: Sides) -> Result<u64> {
    check_delta(delta)?;
    if !(eps > 0.0) || !eps.is_finite() {
        return domain(format!("eps = {eps} must be positive"));
    }
    let x = (sides.count() / delta).ln() / (2.0 * eps * eps);
    // guard against ln/division rounding pushing an exact integer upward
    let n = (x * (1.0 - 1e-12)).ceil().max(1.0);
    Ok(n as u64)
}

/// p̂ + (b − a)·radius for a sample with a declared range [a, b].
pub fn hoeffding_mean_bound(sample: &Sample, delta: f64, sides: Sides) -> Result<BoundResult> {
    let Some(lower) = sample.lower() else {
        return domain("hoeffding needs a lower bound on the sample");
    };
    let r = hoeffding_radius(sample.len() as u64, delta, sides)?;
    let width = sample.upper() - lower;
    let mean = sample.mean();
    Ok(BoundResult::new(mean + width * r, delta, Method::Hoeffding)?
        .with("mean", mean)
        .with("radius", width * r)
        .clip_unit(sample.is_unit()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{rng_from, split};
    use approx::assert_abs_diff_eq;
    use rand::seq::SliceRandom;
    use rand::Rng;

    #[test]
    fn tail_examples() {
        let m = markov_chebyshev_tail(Tail::Markov { mean: 5.0, eps: 8.0 }).unwrap();
        assert_abs_diff_eq!(m, 5.0 / 8.0, epsilon = 1e-15);
        assert_eq!(markov_chebyshev_tail(Tail::Chebyshev { variance: 0.0, eps: 0.1 }).unwrap(), 0.0);
        let c = markov_chebyshev_tail(Tail::Chebyshev { variance: 0.25 / 100.0, eps: 0.1 }).unwrap();
        assert_abs_diff_eq!(c, 0.25, epsilon = 1e-12);
        assert!(markov_chebyshev_tail(Tail::Markov { mean: 1.0, eps: 0.0 }).is_err());
        assert_eq!(markov_chebyshev_tail(Tail::Markov { mean: 5.0, eps: 1.0 }).unwrap(), 1.0);
    }

    #[test]
    fn radius_examples() {
        assert_abs_diff_eq!(hoeffding_radius(1000, 0.01, Sides::One).unwrap(), 0.047985, epsilon = 1e-6);
        assert_abs_diff_eq!(hoeffding_radius(1000, 0.01, Sides::Two).unwrap(), 0.051470, epsilon = 1e-6);
        let r = hoeffding_radius(250, 0.03, Sides::One).unwrap();
        assert_abs_diff_eq!((-2.0 * 250.0 * r * r).exp(), 0.03, epsilon = 1e-14);
        assert!(hoeffding_radius(10, 1.0, Sides::One).is_err());
        assert!(hoeffding_radius(0, 0.1, Sides::One).is_err());
    }

    #[test]
    fn solve_n_examples() {
        assert_eq!(hoeffding_solve_n(0.01, 0.01, Sides::One).unwrap(), 23026);
        assert_eq!(hoeffding_solve_n(1.0, 0.5, Sides::One).unwrap(), 1);
        let delta = 2.0 * (-2.0f64).exp();
        assert_eq!(hoeffding_solve_n(0.1, delta, Sides::Two).unwrap(), 100);
        for &(eps, delta) in &[(0.05, 0.1), (0.013, 0.001), (0.2, 0.3)] {
            let n = hoeffding_solve_n(eps, delta, Sides::Two).unwrap();
            assert!(hoeffding_radius(n, delta, Sides::Two).unwrap() <= eps * (1.0 + 1e-12));
            assert!(hoeffding_radius(n - 1, delta, Sides::Two).unwrap() > eps);
        }
    }

    #[test]
    fn hoeffding_without_replacement_coverage() {
        let mut rng = rng_from(11);
        let population: Vec<f64> = (0..100).map(|_| rng.random::<f64>()).collect();
        let mu = population.iter().sum::<f64>() / 100.0;
        let (delta, trials) = (0.05, 10_000);
        let mut violations = 0;
        for t in 0..trials {
            let mut r = rng_from(split(99, t));
            let mut pop = population.clone();
            pop.shuffle(&mut r);
            let s = Sample::unit(pop[..50].to_vec()).unwrap();
            let b = hoeffding_mean_bound(&s, delta, Sides::One).unwrap();
            if mu > b.value {
                violations += 1;
            }
        }
        let freq = violations as f64 / trials as f64;
        let sigma = (delta * (1.0 - delta) / trials as f64).sqrt();
        assert!(freq <= delta + 3.0 * sigma, "freq {freq}");
    }
}
