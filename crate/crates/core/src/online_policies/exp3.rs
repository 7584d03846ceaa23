use super::{draw, softmin, Decision, Feedback, Observation, Policy};
use crate::divergences::ProbVec;
use crate::error::{domain, Error, Result};
use crate::rng::SimRng;

/// ℓ/p if the arm was played, 0 otherwise.
pub fn importance_weighted_loss(loss: f64, p_chosen: f64, chosen: bool) -> Result<f64> {
    if !(0.0..=1.0).contains(&loss) {
        return domain(format!("loss {loss} outside [0, 1]"));
    }
    if !chosen {
        return Ok(0.0);
    }
    if !(p_chosen > 0.0 && p_chosen <= 1.0) {
        return domain(format!("chosen arm with probability {p_chosen}"));
    }
    Ok(loss / p_chosen)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exp3Variant {
    /// p = softmax(−η L̃) on importance-weighted losses.
    Losses,
    /// p = (1 − η) softmax(η R̃) + η/K on importance-weighted rewards.
    Rewards,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Rate {
    Fixed(f64),
    /// η_t = √(ln K / (tK))
    Anytime,
}

#[derive(Debug, Clone)]
pub struct Exp3 {
    k: usize,
    variant: Exp3Variant,
    rate: Rate,
    estimates: Vec<f64>,
    last_p: Vec<f64>,
    last_arm: Option<usize>,
}

impl Exp3 {
    /// Anytime rate √(ln K / (tK)).
    pub fn anytime(k: usize, variant: Exp3Variant) -> Result<Self> {
        Self::build(k, variant, Rate::Anytime)
    }

    pub fn fixed(k: usize, variant: Exp3Variant, eta: f64) -> Result<Self> {
        let ok = match variant {
            Exp3Variant::Losses => eta > 0.0 && eta.is_finite(),
            Exp3Variant::Rewards => eta > 0.0 && eta < 1.0,
        };
        if !ok {
            return domain(format!("invalid eta = {eta} for {variant:?}"));
        }
        Self::build(k, variant, Rate::Fixed(eta))
    }

    /// Fixed rate √(2 ln K / (KT)).
    pub fn with_horizon(k: usize, variant: Exp3Variant, horizon: usize) -> Result<Self> {
        if k < 2 || horizon == 0 {
            return domain("exp3 needs K >= 2 and T >= 1");
        }
        let kf = k as f64;
        Self::fixed(k, variant, (2.0 * kf.ln() / (kf * horizon as f64)).sqrt())
    }

    fn build(k: usize, variant: Exp3Variant, rate: Rate) -> Result<Self> {
        if k < 2 {
            return domain("exp3 needs K >= 2");
        }
        Ok(Self { k, variant, rate, estimates: vec![0.0; k], last_p: vec![1.0 / k as f64; k], last_arm: None })
    }

    /// Cumulative importance-weighted estimates (losses or rewards).
    pub fn estimates(&self) -> &[f64] {
        &self.estimates
    }

    pub fn eta(&self, t: usize) -> f64 {
        match self.rate {
            Rate::Fixed(e) => e,
            Rate::Anytime => {
                let kf = self.k as f64;
                (kf.ln() / (t.max(1) as f64 * kf)).sqrt()
            }
        }
    }

    /// Distribution for round t from the current state.
    pub fn distribution(&self, t: usize) -> Vec<f64> {
        let eta = self.eta(t);
        match self.variant {
            Exp3Variant::Losses => softmin(&self.estimates, eta),
            Exp3Variant::Rewards => {
                let neg: Vec<f64> = self.estimates.iter().map(|r| -r).collect();
                let g = eta.min(1.0);
                let floor = g / self.k as f64;
                softmin(&neg, eta).into_iter().map(|q| (1.0 - g) * q + floor).collect()
            }
        }
    }
}

impl Policy for Exp3 {
    fn name(&self) -> String {
        match self.variant {
            Exp3Variant::Losses => "exp3".into(),
            Exp3Variant::Rewards => "exp3-rewards".into(),
        }
    }
    fn arms(&self) -> usize {
        self.k
    }
    fn observation(&self) -> Observation {
        Observation::Bandit
    }
    fn decide(&mut self, t: usize, _a: Option<&[Vec<f64>]>, rng: &mut SimRng) -> Result<Decision> {
        let p = self.distribution(t);
        let arm = draw(&p, rng);
        self.last_p = p.clone();
        self.last_arm = Some(arm);
        Ok(Decision { arm, dist: Some(p) })
    }
    fn update(&mut self, feedback: &Feedback) -> Result<()> {
        feedback.validate(self.k)?;
        let (arm, loss) = match feedback {
            Feedback::Bandit { arm, loss } => (*arm, *loss),
            Feedback::Full(col) => {
                let arm = self.last_arm.ok_or_else(|| Error::Domain("update before decide".into()))?;
                (arm, col[arm])
            }
        };
        let value = match self.variant {
            Exp3Variant::Losses => loss,
            Exp3Variant::Rewards => 1.0 - loss,
        };
        self.estimates[arm] += importance_weighted_loss(value, self.last_p[arm], true)?;
        Ok(())
    }
}

/// Arm distribution p(a) = Σ_h w(h) q_h(a) together with the advice used to
/// project arm-level estimates onto experts.
#[derive(Debug, Clone, PartialEq)]
pub struct Exp4Mix {
    pub p: ProbVec,
    advice: Vec<Vec<f64>>,
}

impl Exp4Mix {
    /// ℓ̃_h = Σ_a q_h(a) ℓ̃_a.
    pub fn project(&self, arm_estimates: &[f64]) -> Vec<f64> {
        self.advice.iter().map(|q| q.iter().zip(arm_estimates).map(|(a, b)| a * b).sum()).collect()
    }
}

pub fn exp4_mix(weights: &ProbVec, advice: &[Vec<f64>]) -> Result<Exp4Mix> {
    if advice.len() != weights.len() {
        return Err(Error::LengthMismatch { expected: weights.len(), got: advice.len() });
    }
    let k = advice.first().map_or(0, |r| r.len());
    for row in advice {
        if row.len() != k {
            return Err(Error::LengthMismatch { expected: k, got: row.len() });
        }
        ProbVec::new(row.clone())?;
    }
    let mut p = vec![0.0; k];
    for (w, row) in weights.weights().iter().zip(advice) {
        for (pa, q) in p.iter_mut().zip(row) {
            *pa += w * q;
        }
    }
    Ok(Exp4Mix { p: ProbVec::from_unnormalized(p)?, advice: advice.to_vec() })
}

/// EXP4 over N experts with Hedge on importance-weighted expert losses.
#[derive(Debug, Clone)]
pub struct Exp4 {
    k: usize,
    eta: f64,
    expert_losses: Vec<f64>,
    last: Option<(Exp4Mix, usize)>,
}

impl Exp4 {
    /// η = √(2 ln N / (KT)).
    pub fn with_horizon(k: usize, experts: usize, horizon: usize) -> Result<Self> {
        if k < 2 || experts < 2 || horizon == 0 {
            return domain("exp4 needs K >= 2, N >= 2 and T >= 1");
        }
        let eta = (2.0 * (experts as f64).ln() / (k as f64 * horizon as f64)).sqrt();
        Self::fixed(k, experts, eta)
    }

    pub fn fixed(k: usize, experts: usize, eta: f64) -> Result<Self> {
        if !(eta > 0.0) || experts == 0 || k == 0 {
            return domain("exp4 needs eta > 0 and nonempty arms/experts");
        }
        Ok(Self { k, eta, expert_losses: vec![0.0; experts], last: None })
    }

    pub fn expert_losses(&self) -> &[f64] {
        &self.expert_losses
    }
}

impl Policy for Exp4 {
    fn name(&self) -> String {
        "exp4".into()
    }
    fn arms(&self) -> usize {
        self.k
    }
    fn observation(&self) -> Observation {
        Observation::Bandit
    }
    fn decide(&mut self, _t: usize, advice: Option<&[Vec<f64>]>, rng: &mut SimRng) -> Result<Decision> {
        let advice = advice.ok_or_else(|| Error::Domain("exp4 needs expert advice".into()))?;
        let w = ProbVec::new(softmin(&self.expert_losses, self.eta))?;
        let mix = exp4_mix(&w, advice)?;
        if mix.p.len() != self.k {
            return Err(Error::LengthMismatch { expected: self.k, got: mix.p.len() });
        }
        let arm = draw(mix.p.weights(), rng);
        let dist = mix.p.weights().to_vec();
        self.last = Some((mix, arm));
        Ok(Decision { arm, dist: Some(dist) })
    }
    fn update(&mut self, feedback: &Feedback) -> Result<()> {
        feedback.validate(self.k)?;
        let (mix, chosen) = self.last.take().ok_or_else(|| Error::Domain("update before decide".into()))?;
        let loss = match feedback {
            Feedback::Bandit { loss, .. } => *loss,
            Feedback::Full(col) => col[chosen],
        };
        let mut est = vec![0.0; self.k];
        est[chosen] = importance_weighted_loss(loss, mix.p.weights()[chosen], true)?;
        for (acc, l) in self.expert_losses.iter_mut().zip(mix.project(&est)) {
            *acc += l;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn iw_examples() {
        assert_eq!(importance_weighted_loss(0.7, 0.3, false).unwrap(), 0.0);
        assert_eq!(importance_weighted_loss(1.0, 0.25, true).unwrap(), 4.0);
        assert!(importance_weighted_loss(1.0, 0.0, true).is_err());
    }

    #[test]
    fn unbiased_and_second_moment_by_enumeration() {
        let p = [0.1, 0.2, 0.3, 0.4];
        let l = [0.9, 0.5, 0.0, 1.0];
        let k = p.len();
        let mut second = 0.0;
        for a in 0..k {
            let mut mean = 0.0;
            let mut sq = 0.0;
            for (drawn, pd) in p.iter().enumerate() {
                let est = importance_weighted_loss(l[a], *pd, drawn == a).unwrap();
                mean += pd * est;
                sq += pd * est * est;
            }
            assert_abs_diff_eq!(mean, l[a], epsilon = 1e-15);
            second += p[a] * sq;
        }
        assert!(second <= k as f64);
    }

    #[test]
    fn first_round_uniform() {
        let mut rng = rng_from(0);
        for v in [Exp3Variant::Losses, Exp3Variant::Rewards] {
            let mut e = Exp3::anytime(4, v).unwrap();
            assert_eq!(e.decide(1, None, &mut rng).unwrap().dist.unwrap(), vec![0.25; 4]);
        }
    }

    #[test]
    fn rewards_floor_and_monotone_estimates() {
        let mut rng = rng_from(2);
        let mut e = Exp3::fixed(3, Exp3Variant::Rewards, 0.2).unwrap();
        let mut l = Exp3::anytime(3, Exp3Variant::Losses).unwrap();
        for t in 1..500 {
            let d = e.decide(t, None, &mut rng).unwrap();
            assert!(d.dist.unwrap().iter().all(|p| *p >= 0.2 / 3.0 - 1e-15));
            e.update(&Feedback::Bandit { arm: d.arm, loss: (t % 3) as f64 / 2.0 }).unwrap();
            let before = l.estimates().to_vec();
            let d = l.decide(t, None, &mut rng).unwrap();
            let s: f64 = d.dist.as_ref().unwrap().iter().sum();
            assert!((s - 1.0).abs() <= 1e-9);
            l.update(&Feedback::Bandit { arm: d.arm, loss: 0.3 }).unwrap();
            assert!(l.estimates().iter().zip(&before).all(|(a, b)| a >= b));
        }
        assert!(Exp3::fixed(3, Exp3Variant::Rewards, 1.0).is_err());
    }

    #[test]
    fn exp3_eta_minimizes_bound() {
        let (k, t) = (4usize, 10_000usize);
        let e = Exp3::with_horizon(k, Exp3Variant::Losses, t).unwrap().eta(1);
        let lk = (k as f64).ln();
        let f = |x: f64| lk / x + x * (k * t) as f64 / 2.0;
        for i in 1..=10_000 {
            assert!(f(i as f64 * 1e-5) >= f(e) - 1e-9);
        }
    }

    #[test]
    fn mix_examples() {
        let u = ProbVec::uniform(2).unwrap();
        let adv = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert_eq!(exp4_mix(&u, &adv).unwrap().p.weights(), &[0.5, 0.5]);
        let w = ProbVec::new(vec![0.75, 0.25]).unwrap();
        assert_eq!(exp4_mix(&w, &adv).unwrap().p.weights(), &[0.75, 0.25]);
        let one = ProbVec::uniform(1).unwrap();
        let m = exp4_mix(&one, &[vec![0.3, 0.7]]).unwrap();
        assert_eq!(m.p.weights(), &[0.3, 0.7]);
        assert_eq!(m.project(&[2.0, 1.0]), vec![0.3 * 2.0 + 0.7]);
        assert!(exp4_mix(&u, &[vec![0.5, 0.6], vec![1.0, 0.0]]).is_err());
    }

    proptest! {
        #[test]
        fn exp3_shift_invariant(ks in proptest::collection::vec(0u32..1024, 2..6), c in 0u32..1024) {
            let mut a = Exp3::anytime(ks.len(), Exp3Variant::Losses).unwrap();
            let mut b = a.clone();
            a.estimates = ks.iter().map(|k| *k as f64 / 8.0).collect();
            b.estimates = ks.iter().map(|k| (*k + c) as f64 / 8.0).collect();
            prop_assert_eq!(a.distribution(5), b.distribution(5));
        }
    }
}
