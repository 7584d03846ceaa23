use super::{argmax_lowest, Decision, Feedback, Observation, Policy};
use crate::error::{domain, Result};
use crate::rng::SimRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UcbParam {
    /// radius √(3 ln t / (2N))
    Original,
    /// radius √(ln t / N)
    Improved,
}

/// μ̂ + radius(t, N). `t` is a round index but any real t ≥ 1 is accepted.
pub fn ucb_index(mu_hat: f64, t: f64, n: usize, param: UcbParam) -> Result<f64> {
    if n == 0 {
        return domain("unplayed arms have no index; play them first");
    }
    if !(t >= 1.0) {
        return domain("t must be at least 1");
    }
    let lt = t.ln();
    let r = match param {
        UcbParam::Original => (3.0 * lt / (2.0 * n as f64)).sqrt(),
        UcbParam::Improved => (lt / n as f64).sqrt(),
    };
    Ok(mu_hat + r)
}

/// UCB1 on rewards r = 1 − ℓ. Arms are played once each in ascending order,
/// then the highest index wins with ties to the lowest index.
#[derive(Debug, Clone)]
pub struct Ucb1 {
    param: UcbParam,
    counts: Vec<usize>,
    sums: Vec<f64>,
    last_arm: Option<usize>,
}

impl Ucb1 {
    pub fn new(k: usize, param: UcbParam) -> Result<Self> {
        if k == 0 {
            return domain("need at least one arm");
        }
        Ok(Self { param, counts: vec![0; k], sums: vec![0.0; k], last_arm: None })
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn means(&self) -> Vec<f64> {
        self.sums.iter().zip(&self.counts).map(|(s, n)| if *n == 0 { 0.0 } else { s / *n as f64 }).collect()
    }

    pub fn choose(&self, t: usize) -> usize {
        if let Some(a) = self.counts.iter().position(|n| *n == 0) {
            return a;
        }
        let idx: Vec<f64> = self
            .means()
            .iter()
            .zip(&self.counts)
            .map(|(m, n)| ucb_index(*m, t.max(1) as f64, *n, self.param).unwrap_or(f64::INFINITY))
            .collect();
        argmax_lowest(&idx)
    }

    /// Records reward `r` for `arm`.
    pub fn record(&mut self, arm: usize, reward: f64) {
        self.counts[arm] += 1;
        self.sums[arm] += reward;
    }
}

impl Policy for Ucb1 {
    fn name(&self) -> String {
        match self.param {
            UcbParam::Original => "ucb1".into(),
            UcbParam::Improved => "ucb1-improved".into(),
        }
    }
    fn arms(&self) -> usize {
        self.counts.len()
    }
    fn observation(&self) -> Observation {
        Observation::Bandit
    }
    fn decide(&mut self, t: usize, _a: Option<&[Vec<f64>]>, _rng: &mut SimRng) -> Result<Decision> {
        let arm = self.choose(t);
        self.last_arm = Some(arm);
        Ok(Decision { arm, dist: None })
    }
    fn update(&mut self, feedback: &Feedback) -> Result<()> {
        feedback.validate(self.counts.len())?;
        let (arm, loss) = match feedback {
            Feedback::Bandit { arm, loss } => (*arm, *loss),
            Feedback::Full(col) => {
                let Some(arm) = self.last_arm else {
                    return domain("update before decide");
                };
                (arm, col[arm])
            }
        };
        self.record(arm, 1.0 - loss);
        Ok(())
    }
}

/// ε = max{0, 4 ln(TΔ²)/(TΔ²)} and the number of exploration rounds
/// min(T, 2⌈εT/2⌉).
pub fn epsilon_first_schedule(delta_gap: f64, horizon: usize) -> Result<(f64, usize)> {
    if !(delta_gap > 0.0 && delta_gap <= 1.0) {
        return domain(format!("gap {delta_gap} outside (0, 1]"));
    }
    if horizon == 0 {
        return domain("T must be at least 1");
    }
    let x = horizon as f64 * delta_gap * delta_gap;
    let eps = (4.0 * x.ln() / x).max(0.0);
    let half = (eps * horizon as f64 / 2.0).ceil() as usize;
    Ok((eps, (2 * half).min(horizon)))
}

/// Explore round-robin for a fixed number of rounds, then commit to the
/// empirically best arm.
#[derive(Debug, Clone)]
pub struct EpsilonFirst {
    explore: usize,
    counts: Vec<usize>,
    sums: Vec<f64>,
    committed: Option<usize>,
    last_arm: Option<usize>,
}

impl EpsilonFirst {
    pub fn new(k: usize, explore: usize) -> Result<Self> {
        if k == 0 {
            return domain("need at least one arm");
        }
        Ok(Self { explore, counts: vec![0; k], sums: vec![0.0; k], committed: None, last_arm: None })
    }

    /// Exploration length from the gap and horizon.
    pub fn from_gap(k: usize, gap: f64, horizon: usize) -> Result<Self> {
        Self::new(k, epsilon_first_schedule(gap, horizon)?.1)
    }

    pub fn exploration_rounds(&self) -> usize {
        self.explore
    }
}

impl Policy for EpsilonFirst {
    fn name(&self) -> String {
        "epsilon-first".into()
    }
    fn arms(&self) -> usize {
        self.counts.len()
    }
    fn observation(&self) -> Observation {
        Observation::Bandit
    }
    fn decide(&mut self, t: usize, _a: Option<&[Vec<f64>]>, _rng: &mut SimRng) -> Result<Decision> {
        let k = self.counts.len();
        let arm = if t <= self.explore {
            (t - 1) % k
        } else {
            *self.committed.get_or_insert_with(|| {
                let means: Vec<f64> = self
                    .sums
                    .iter()
                    .zip(&self.counts)
                    .map(|(s, n)| if *n == 0 { 0.0 } else { s / *n as f64 })
                    .collect();
                argmax_lowest(&means)
            })
        };
        self.last_arm = Some(arm);
        Ok(Decision { arm, dist: None })
    }
    fn update(&mut self, feedback: &Feedback) -> Result<()> {
        feedback.validate(self.counts.len())?;
        let (arm, loss) = match feedback {
            Feedback::Bandit { arm, loss } => (*arm, *loss),
            Feedback::Full(col) => {
                let Some(arm) = self.last_arm else {
                    return domain("update before decide");
                };
                (arm, col[arm])
            }
        };
        self.counts[arm] += 1;
        self.sums[arm] += 1.0 - loss;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from;
    use approx::assert_abs_diff_eq;

    #[test]
    fn index_examples() {
        let e2 = 2f64.exp();
        assert_abs_diff_eq!(ucb_index(0.5, e2, 3, UcbParam::Original).unwrap(), 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(ucb_index(0.5, e2, 3, UcbParam::Improved).unwrap(), 1.31650, epsilon = 1e-5);
        assert_eq!(ucb_index(0.3, 1.0, 1, UcbParam::Improved).unwrap(), 0.3);
        assert!(ucb_index(0.3, 1.0, 0, UcbParam::Improved).is_err());
        // index on [0, K]-scaled rewards is K times the index on [0, 1]
        let k = 16.0;
        let scaled = k * 0.2 + k * (5f64.ln() / 4.0).sqrt();
        assert_abs_diff_eq!(scaled, k * ucb_index(0.2, 5.0, 4, UcbParam::Improved).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn initialization_and_counts() {
        let mut u = Ucb1::new(4, UcbParam::Improved).unwrap();
        let mut rng = rng_from(0);
        for t in 1..=4 {
            let d = u.decide(t, None, &mut rng).unwrap();
            assert_eq!(d.arm, t - 1);
            u.update(&Feedback::Bandit { arm: d.arm, loss: 0.5 }).unwrap();
        }
        for t in 5..200 {
            let d = u.decide(t, None, &mut rng).unwrap();
            u.update(&Feedback::Bandit { arm: d.arm, loss: if d.arm == 2 { 0.1 } else { 0.9 } }).unwrap();
            assert_eq!(u.counts().iter().sum::<usize>(), t);
            assert!(u.counts().iter().all(|n| *n >= 1));
        }
        assert_eq!(argmax_lowest(&u.counts().iter().map(|n| *n as f64).collect::<Vec<_>>()), 2);
    }

    #[test]
    fn epsilon_first_examples() {
        let (eps, rounds) = epsilon_first_schedule(0.2, 10_000).unwrap();
        assert_abs_diff_eq!(eps, 0.0599146, epsilon = 1e-7);
        assert_eq!(rounds, 600);
        assert_eq!(epsilon_first_schedule(0.1, 50).unwrap(), (0.0, 0));
        assert!(epsilon_first_schedule(0.0, 50).is_err());
        // stationary point of ε/2 + 2exp(−εTΔ²/4)
        let (t, d) = (10_000.0, 0.2);
        let g = |e: f64| 0.5 - (t * d * d / 2.0) * (-e * t * d * d / 4.0).exp();
        assert!(g(eps).abs() <= 1e-9);
    }

    #[test]
    fn epsilon_first_commits_to_best() {
        let mut p = EpsilonFirst::new(2, 10).unwrap();
        let mut rng = rng_from(0);
        for t in 1..=30 {
            let d = p.decide(t, None, &mut rng).unwrap();
            if t <= 10 {
                assert_eq!(d.arm, (t - 1) % 2);
            } else {
                assert_eq!(d.arm, 1);
            }
            p.update(&Feedback::Bandit { arm: d.arm, loss: if d.arm == 1 { 0.2 } else { 0.8 } }).unwrap();
        }
    }
}
