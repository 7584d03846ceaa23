use super::{argmin_lowest, draw, softmin, Decision, Feedback, Observation, Policy};
use crate::divergences::ProbVec;
use crate::error::{domain, Result};
use crate::rng::SimRng;

/// p(a) ∝ e^{−ηL(a)}, computed with the minimum subtracted.
pub fn hedge_distribution(cumulative: &[f64], eta: f64) -> Result<ProbVec> {
    if cumulative.is_empty() {
        return domain("no arms");
    }
    if !(eta > 0.0) || !eta.is_finite() || cumulative.iter().any(|l| !l.is_finite()) {
        return domain("hedge needs eta > 0 and finite losses");
    }
    ProbVec::new(softmin(cumulative, eta))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HedgeEta {
    /// √(2 ln K / T)
    Simple,
    /// √(8 ln K / T)
    Tight,
    /// √(ln K / t)
    AnytimeSimple(usize),
    /// 2√(ln K / t)
    AnytimeTight(usize),
}

pub fn hedge_eta(k: usize, horizon: usize, variant: HedgeEta) -> Result<f64> {
    if k < 2 {
        return domain("hedge needs K >= 2");
    }
    let lk = (k as f64).ln();
    let (c, t) = match variant {
        HedgeEta::Simple => (2.0, horizon),
        HedgeEta::Tight => (8.0, horizon),
        HedgeEta::AnytimeSimple(t) => (1.0, t),
        HedgeEta::AnytimeTight(t) => (4.0, t),
    };
    if t == 0 {
        return domain("time index must be at least 1");
    }
    Ok((c * lk / t as f64).sqrt())
}

/// Argmin of cumulative losses, lowest index on ties.
pub fn ftl_choice(cumulative: &[f64]) -> Result<usize> {
    if cumulative.is_empty() {
        return domain("no arms");
    }
    Ok(argmin_lowest(cumulative))
}

/// (period m = ⌊log₂ t⌋, η_m = √(8 ln K / 2^m), reset iff t = 2^m).
pub fn doubling_schedule(t: usize, k: usize) -> Result<(u32, f64, bool)> {
    if t == 0 {
        return domain("t must be at least 1");
    }
    if k < 2 {
        return domain("need K >= 2");
    }
    let m = usize::BITS - 1 - t.leading_zeros();
    let eta = (8.0 * (k as f64).ln() / (1u64 << m) as f64).sqrt();
    Ok((m, eta, t.is_power_of_two()))
}

/// Learning-rate rule of a running Hedge instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EtaRule {
    Fixed(f64),
    /// η_t = c √(ln K / t)
    Anytime(f64),
}

#[derive(Debug, Clone)]
pub struct Hedge {
    k: usize,
    rule: EtaRule,
    cumulative: Vec<f64>,
    label: String,
}

impl Hedge {
    pub fn fixed(k: usize, eta: f64) -> Result<Self> {
        if !(eta > 0.0) || !eta.is_finite() {
            return domain(format!("eta = {eta} must be positive"));
        }
        Self::build(k, EtaRule::Fixed(eta), format!("hedge(eta={eta:.6})"))
    }

    pub fn with_horizon(k: usize, horizon: usize, variant: HedgeEta) -> Result<Self> {
        let eta = hedge_eta(k, horizon, variant)?;
        let name = match variant {
            HedgeEta::Tight => "hedge-tight",
            _ => "hedge",
        };
        Self::build(k, EtaRule::Fixed(eta), name.into())
    }

    /// Anytime rate c√(ln K / t): c = 1 (simple) or c = 2 (tight).
    pub fn anytime(k: usize, coef: f64) -> Result<Self> {
        if !(coef > 0.0) {
            return domain("anytime coefficient must be positive");
        }
        let name = if coef == 2.0 { "hedge-anytime-tight".into() } else { format!("hedge-anytime(c={coef})") };
        Self::build(k, EtaRule::Anytime(coef), name)
    }

    fn build(k: usize, rule: EtaRule, label: String) -> Result<Self> {
        if k < 2 {
            return domain("hedge needs K >= 2");
        }
        Ok(Self { k, rule, cumulative: vec![0.0; k], label })
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    fn eta(&self, t: usize) -> f64 {
        match self.rule {
            EtaRule::Fixed(e) => e,
            EtaRule::Anytime(c) => c * ((self.k as f64).ln() / t as f64).sqrt(),
        }
    }
}

impl Policy for Hedge {
    fn name(&self) -> String {
        self.label.clone()
    }
    fn arms(&self) -> usize {
        self.k
    }
    fn observation(&self) -> Observation {
        Observation::Full
    }
    fn decide(&mut self, t: usize, _a: Option<&[Vec<f64>]>, rng: &mut SimRng) -> Result<Decision> {
        let p = softmin(&self.cumulative, self.eta(t.max(1)));
        Ok(Decision { arm: draw(&p, rng), dist: Some(p) })
    }
    fn update(&mut self, feedback: &Feedback) -> Result<()> {
        let Feedback::Full(col) = feedback else {
            return domain("hedge needs full-information feedback");
        };
        feedback.validate(self.k)?;
        for (c, l) in self.cumulative.iter_mut().zip(col) {
            *c += l;
        }
        Ok(())
    }
}

/// Hedge restarted at t = 2^m with η_m = √(8 ln K / 2^m).
#[derive(Debug, Clone)]
pub struct DoublingHedge {
    k: usize,
    cumulative: Vec<f64>,
}

impl DoublingHedge {
    pub fn new(k: usize) -> Result<Self> {
        if k < 2 {
            return domain("hedge needs K >= 2");
        }
        Ok(Self { k, cumulative: vec![0.0; k] })
    }
}

impl Policy for DoublingHedge {
    fn name(&self) -> String {
        "hedge-doubling".into()
    }
    fn arms(&self) -> usize {
        self.k
    }
    fn observation(&self) -> Observation {
        Observation::Full
    }
    fn decide(&mut self, t: usize, _a: Option<&[Vec<f64>]>, rng: &mut SimRng) -> Result<Decision> {
        let (_, eta, reset) = doubling_schedule(t.max(1), self.k)?;
        if reset {
            self.cumulative.iter_mut().for_each(|c| *c = 0.0);
        }
        let p = softmin(&self.cumulative, eta);
        Ok(Decision { arm: draw(&p, rng), dist: Some(p) })
    }
    fn update(&mut self, feedback: &Feedback) -> Result<()> {
        let Feedback::Full(col) = feedback else {
            return domain("hedge needs full-information feedback");
        };
        feedback.validate(self.k)?;
        for (c, l) in self.cumulative.iter_mut().zip(col) {
            *c += l;
        }
        Ok(())
    }
}

/// Follow the leader.
#[derive(Debug, Clone)]
pub struct Ftl {
    cumulative: Vec<f64>,
}

impl Ftl {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return domain("need at least one arm");
        }
        Ok(Self { cumulative: vec![0.0; k] })
    }
}

impl Policy for Ftl {
    fn name(&self) -> String {
        "ftl".into()
    }
    fn arms(&self) -> usize {
        self.cumulative.len()
    }
    fn observation(&self) -> Observation {
        Observation::Full
    }
    fn decide(&mut self, _t: usize, _a: Option<&[Vec<f64>]>, _rng: &mut SimRng) -> Result<Decision> {
        Ok(Decision { arm: argmin_lowest(&self.cumulative), dist: None })
    }
    fn update(&mut self, feedback: &Feedback) -> Result<()> {
        let Feedback::Full(col) = feedback else {
            return domain("ftl needs full-information feedback");
        };
        feedback.validate(self.cumulative.len())?;
        for (c, l) in self.cumulative.iter_mut().zip(col) {
            *c += l;
        }
        Ok(())
    }
}
