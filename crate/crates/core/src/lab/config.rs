//! Experiment files: `[section]` headers, `key = value` lines, `#` comments.
//!
//! ```text
//! [experiment]
//! name = hedge-vs-ftl
//! horizon = 2000
//!
//! [environment iid]
//! kind = bernoulli
//! loss_means = 0.25, 0.75
//! feedback = full
//!
//! [policy ftl]
//! kind = ftl
//! ```

use crate::environments::ReplayMode;
use crate::error::{Error, Result};
use crate::online_policies::{Observation, UcbParam};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Game,
    BoundsCompare,
    SplitKlCompare,
    UnexpectedBernsteinCompare,
    PacBayesAggregate,
    RecursivePb,
}

impl ExperimentKind {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "game" => Self::Game,
            "bounds-compare" => Self::BoundsCompare,
            "split-kl-compare" => Self::SplitKlCompare,
            "unexpected-bernstein-compare" => Self::UnexpectedBernsteinCompare,
            "pacbayes-aggregate" => Self::PacBayesAggregate,
            "recursive-pb" => Self::RecursivePb,
            _ => return None,
        })
    }
}

/// Quantity recorded per round in game experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// Pseudo-regret when the means are known, regret otherwise; expert
    /// variants when the environment gives advice; running mean reward
    /// for replay.
    Auto,
    Regret,
    PseudoRegret,
    ExpectedRegret,
    ExpertRegret,
    ExpertPseudoRegret,
    Reward,
}

impl Metric {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "auto" => Self::Auto,
            "regret" => Self::Regret,
            "pseudo-regret" => Self::PseudoRegret,
            "expected-regret" => Self::ExpectedRegret,
            "expert-regret" => Self::ExpertRegret,
            "expert-pseudo-regret" => Self::ExpertPseudoRegret,
            "reward" => Self::Reward,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LogSource {
    File(PathBuf),
    /// Generated afresh for every repetition.
    Synthetic {
        reward_means: Vec<f64>,
        records: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum EnvKind {
    Bernoulli { loss_means: Vec<f64>, feedback: Observation },
    FtlBreaker { feedback: Observation },
    UcbBreaker { arms: usize, param: UcbParam, feedback: Observation },
    ExpertAdvice { loss_means: Vec<f64>, experts: usize },
    OfflineLog { source: LogSource, mode: ReplayMode },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvConfig {
    pub name: String,
    pub kind: EnvKind,
    pub line: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HedgeRate {
    Simple,
    Tight,
    Anytime,
    AnytimeTight,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exp3Rate {
    Anytime,
    Horizon,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum PolicyKind {
    Hedge(HedgeRate),
    Ftl,
    Exp3(Exp3Rate),
    Exp3Rewards(Exp3Rate),
    Exp4(Option<f64>),
    Ucb1(UcbParam),
    EpsilonFirst { gap: f64 },
    DoublingHedge,
    Uniform,
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyConfig {
    pub name: String,
    pub kind: PolicyKind,
    /// Environments this policy runs on; all when absent.
    pub environments: Option<Vec<String>>,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub kind: ExperimentKind,
    pub horizon: usize,
    pub repetitions: usize,
    pub seed: u64,
    pub delta: f64,
    pub output: Option<PathBuf>,
    pub x_label: String,
    pub y_label: String,
    pub metric: Metric,
    /// Sample size for the bound comparisons.
    pub n: usize,
    /// Number of grid points for the bound comparisons.
    pub grid: usize,
    /// Right end of the p̂ grid in bounds-compare.
    pub p_max: f64,
    /// Hypothesis-class sizes (pacbayes-aggregate) or the class size (recursive-pb).
    pub hypotheses: Vec<usize>,
    /// Stage counts compared in recursive-pb.
    pub stages: Vec<usize>,
    pub environments: Vec<EnvConfig>,
    pub policies: Vec<PolicyConfig>,
}

fn err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Config { line, msg: msg.into() })
}

struct Section {
    header: String,
    name: Option<String>,
    line: usize,
    entries: BTreeMap<String, (String, usize)>,
}

impl Section {
    fn path(&self, key: &str) -> String {
        match &self.name {
            Some(n) => format!("{}.{n}.{key}", self.header),
            None => format!("{}.{key}", self.header),
        }
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        for (k, (_, line)) in &self.entries {
            if !allowed.contains(&k.as_str()) {
                return err(*line, format!("unknown key {}", self.path(k)));
            }
        }
        Ok(())
    }

    fn str(&self, key: &str) -> Option<(&str, usize)> {
        self.entries.get(key).map(|(v, l)| (v.as_str(), *l))
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str, what: &str) -> Result<Option<T>> {
        match self.str(key) {
            None => Ok(None),
            Some((v, line)) => match v.parse() {
                Ok(x) => Ok(Some(x)),
                Err(_) => err(line, format!("{} must be {what}, got {v:?}", self.path(key))),
            },
        }
    }

    fn list<T: std::str::FromStr>(&self, key: &str, what: &str) -> Result<Option<Vec<T>>> {
        match self.str(key) {
            None => Ok(None),
            Some((v, line)) => v
                .split(',')
                .map(|s| {
                    s.trim().parse().map_err(|_| Error::Config {
                        line,
                        msg: format!("{} must be a list of {what}", self.path(key)),
                    })
                })
                .collect::<Result<Vec<T>>>()
                .map(Some),
        }
    }

    fn required<T>(&self, v: Option<T>, key: &str) -> Result<T> {
        match v {
            Some(x) => Ok(x),
            None => err(self.line, format!("missing {}", self.path(key))),
        }
    }
}

fn sections(text: &str) -> Result<Vec<Section>> {
    let mut out: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        if let Some(inner) = s.strip_prefix('[') {
            let Some(inner) = inner.strip_suffix(']') else {
                return err(line, "unterminated section header");
            };
            let mut parts = inner.split_whitespace();
            let header = parts.next().unwrap_or("").to_string();
            let name = parts.next().map(str::to_string);
            if parts.next().is_some() {
                return err(line, "section header has too many words");
            }
            out.push(Section { header, name, line, entries: BTreeMap::new() });
            continue;
        }
        let Some((k, v)) = s.split_once('=') else {
            return err(line, format!("expected key = value, got {s:?}"));
        };
        let (k, v) = (k.trim().to_string(), v.trim().to_string());
        if k.is_empty() {
            return err(line, "empty key");
        }
        let Some(sec) = out.last_mut() else {
            return err(line, "key outside of any section");
        };
        if let Some((_, first)) = sec.entries.get(&k) {
            return err(line, format!("duplicate key {} (first set on line {first})", sec.path(&k)));
        }
        sec.entries.insert(k, (v, line));
    }
    Ok(out)
}

fn feedback(sec: &Section, default: Observation) -> Result<Observation> {
    match sec.str("feedback") {
        None => Ok(default),
        Some(("full", _)) => Ok(Observation::Full),
        Some(("bandit", _)) => Ok(Observation::Bandit),
        Some((v, line)) => err(line, format!("{} must be full or bandit, got {v:?}", sec.path("feedback"))),
    }
}

/// Loss means from `loss_means`, `reward_means` or `arms` + `gap` (best arm 0
/// with reward `best`, the others `best − gap`).
fn loss_means(sec: &Section) -> Result<Vec<f64>> {
    let given = ["loss_means", "reward_means", "gap"].iter().filter(|k| sec.str(k).is_some()).count();
    if given != 1 {
        return err(sec.line, format!("{}: give exactly one of loss_means, reward_means, gap", sec.path("")));
    }
    let means = if let Some(l) = sec.list::<f64>("loss_means", "numbers")? {
        l
    } else if let Some(r) = sec.list::<f64>("reward_means", "numbers")? {
        r.iter().map(|m| 1.0 - m).collect()
    } else {
        let gap: f64 = sec.parsed("gap", "a number")?.unwrap_or(0.0);
        let arms: usize = sec.required(sec.parsed("arms", "an integer")?, "arms")?;
        let best: f64 = sec.parsed("best", "a number")?.unwrap_or(0.5);
        (0..arms).map(|a| 1.0 - if a == 0 { best } else { best - gap }).collect()
    };
    if let Some(arms) = sec.parsed::<usize>("arms", "an integer")? {
        if arms != means.len() {
            return err(sec.line, format!("{} = {arms} but {} means given", sec.path("arms"), means.len()));
        }
    }
    if means.is_empty() || means.iter().any(|m| !(0.0..=1.0).contains(m)) {
        return err(sec.line, format!("{}: means must lie in [0, 1]", sec.path("")));
    }
    Ok(means)
}

fn environment(sec: &Section, base: &Path) -> Result<EnvConfig> {
    let name = sec.name.clone().unwrap_or_default();
    let (kind, kline) = match sec.str("kind") {
        Some(k) => k,
        None => return err(sec.line, format!("missing {}", sec.path("kind"))),
    };
    let kind = match kind {
        "bernoulli" => {
            sec.check_keys(&["kind", "arms", "loss_means", "reward_means", "gap", "best", "feedback"])?;
            EnvKind::Bernoulli { loss_means: loss_means(sec)?, feedback: feedback(sec, Observation::Bandit)? }
        }
        "ftl-breaker" => {
            sec.check_keys(&["kind", "feedback"])?;
            EnvKind::FtlBreaker { feedback: feedback(sec, Observation::Full)? }
        }
        "ucb-breaker" => {
            sec.check_keys(&["kind", "arms", "parametrization", "feedback"])?;
            EnvKind::UcbBreaker {
                arms: sec.parsed("arms", "an integer")?.unwrap_or(2),
                param: ucb_param(sec)?,
                feedback: feedback(sec, Observation::Bandit)?,
            }
        }
        "expert-advice" => {
            sec.check_keys(&["kind", "arms", "loss_means", "reward_means", "gap", "best", "experts"])?;
            EnvKind::ExpertAdvice {
                loss_means: loss_means(sec)?,
                experts: sec.parsed("experts", "an integer")?.unwrap_or(4),
            }
        }
        "offline-log" => {
            sec.check_keys(&["kind", "log", "mode", "reward_means", "records"])?;
            let mode = match sec.str("mode") {
                None | Some(("rs", _)) => ReplayMode::RejectionSampling,
                Some(("iw", _)) => ReplayMode::ImportanceWeighted,
                Some((v, line)) => return err(line, format!("{} must be iw or rs, got {v:?}", sec.path("mode"))),
            };
            let source = match (sec.str("log"), sec.list::<f64>("reward_means", "numbers")?) {
                (Some((p, _)), None) => LogSource::File(base.join(p)),
                (None, Some(reward_means)) => LogSource::Synthetic {
                    reward_means,
                    records: sec.parsed("records", "an integer")?.unwrap_or(100_000),
                },
                _ => return err(sec.line, format!("{}: give either log or reward_means", sec.path(""))),
            };
            EnvKind::OfflineLog { source, mode }
        }
        other => return err(kline, format!("unknown environment kind {other:?}")),
    };
    Ok(EnvConfig { name, kind, line: sec.line })
}

fn ucb_param(sec: &Section) -> Result<UcbParam> {
    match sec.str("parametrization") {
        None | Some(("improved", _)) => Ok(UcbParam::Improved),
        Some(("original", _)) => Ok(UcbParam::Original),
        Some((v, line)) => {
            err(line, format!("{} must be original or improved, got {v:?}", sec.path("parametrization")))
        }
    }
}

fn hedge_rate(sec: &Section) -> Result<HedgeRate> {
    Ok(match sec.str("eta") {
        None | Some(("anytime", _)) => HedgeRate::Anytime,
        Some(("simple", _)) => HedgeRate::Simple,
        Some(("tight", _)) => HedgeRate::Tight,
        Some(("anytime-tight", _)) => HedgeRate::AnytimeTight,
        Some((v, line)) => match v.parse::<f64>() {
            Ok(x) if x > 0.0 => HedgeRate::Fixed(x),
            _ => {
                return err(
                    line,
                    format!("{} must be simple, tight, anytime, anytime-tight or a positive number", sec.path("eta")),
                )
            }
        },
    })
}

fn exp3_rate(sec: &Section) -> Result<Exp3Rate> {
    Ok(match sec.str("eta") {
        None | Some(("anytime", _)) => Exp3Rate::Anytime,
        Some(("horizon", _)) => Exp3Rate::Horizon,
        Some((v, line)) => match v.parse::<f64>() {
            Ok(x) if x > 0.0 => Exp3Rate::Fixed(x),
            _ => return err(line, format!("{} must be anytime, horizon or a positive number", sec.path("eta"))),
        },
    })
}

fn policy(sec: &Section) -> Result<PolicyConfig> {
    let name = sec.name.clone().unwrap_or_default();
    let (kind, kline) = match sec.str("kind") {
        Some(k) => k,
        None => return err(sec.line, format!("missing {}", sec.path("kind"))),
    };
    let keys: &[&str] = match kind {
        "hedge" | "exp3" | "exp3-rewards" | "exp4" => &["kind", "eta", "environments"],
        "ucb1" => &["kind", "parametrization", "environments"],
        "epsilon-first" => &["kind", "gap", "environments"],
        "fixed" => &["kind", "arm", "environments"],
        _ => &["kind", "environments"],
    };
    sec.check_keys(keys)?;
    let kind = match kind {
        "hedge" => PolicyKind::Hedge(hedge_rate(sec)?),
        "ftl" => PolicyKind::Ftl,
        "exp3" => PolicyKind::Exp3(exp3_rate(sec)?),
        "exp3-rewards" => PolicyKind::Exp3Rewards(exp3_rate(sec)?),
        "exp4" => match sec.str("eta") {
            None | Some(("horizon", _)) => PolicyKind::Exp4(None),
            Some(_) => PolicyKind::Exp4(Some(sec.parsed::<f64>("eta", "horizon or a number")?.unwrap_or(0.0))),
        },
        "ucb1" => PolicyKind::Ucb1(ucb_param(sec)?),
        "epsilon-first" => PolicyKind::EpsilonFirst { gap: sec.required(sec.parsed("gap", "a number")?, "gap")? },
        "doubling-hedge" => PolicyKind::DoublingHedge,
        "uniform" => PolicyKind::Uniform,
        "fixed" => PolicyKind::Fixed(sec.parsed("arm", "an integer")?.unwrap_or(0)),
        other => return err(kline, format!("unknown policy kind {other:?}")),
    };
    let environments = sec.str("environments").map(|(v, _)| v.split(',').map(|s| s.trim().to_string()).collect());
    Ok(PolicyConfig { name, kind, environments, line: sec.line })
}

/// Parses a config; relative log paths resolve against `base`.
pub fn parse_config(text: &str, base: &Path) -> Result<ExperimentConfig> {
    let secs = sections(text)?;
    let mut exp: Option<&Section> = None;
    let mut environments: Vec<EnvConfig> = Vec::new();
    let mut policies: Vec<PolicyConfig> = Vec::new();
    for sec in &secs {
        match (sec.header.as_str(), &sec.name) {
            ("experiment", None) => {
                if exp.is_some() {
                    return err(sec.line, "second [experiment] section");
                }
                exp = Some(sec);
            }
            ("environment", Some(n)) => {
                if environments.iter().any(|e| &e.name == n) {
                    return err(sec.line, format!("duplicate environment {n}"));
                }
                environments.push(environment(sec, base)?);
            }
            ("policy", Some(n)) => {
                if policies.iter().any(|p| &p.name == n) {
                    return err(sec.line, format!("duplicate policy {n}"));
                }
                policies.push(policy(sec)?);
            }
            ("environment" | "policy", None) => return err(sec.line, format!("[{}] needs a name", sec.header)),
            (h, _) => return err(sec.line, format!("unknown section [{h}]")),
        }
    }
    let Some(e) = exp else {
        return err(0, "missing [experiment] section");
    };
    e.check_keys(&[
        "name",
        "kind",
        "horizon",
        "repetitions",
        "seed",
        "delta",
        "output",
        "x_label",
        "y_label",
        "metric",
        "n",
        "grid",
        "p_max",
        "hypotheses",
        "stages",
    ])?;
    let kind = match e.str("kind") {
        None => ExperimentKind::Game,
        Some((v, line)) => match ExperimentKind::parse(v) {
            Some(k) => k,
            None => return err(line, format!("unknown experiment kind {v:?}")),
        },
    };
    let metric = match e.str("metric") {
        None => Metric::Auto,
        Some((v, line)) => match Metric::parse(v) {
            Some(m) => m,
            None => return err(line, format!("unknown metric {v:?}")),
        },
    };
    let name = e.str("name").map_or_else(|| "experiment".to_string(), |(v, _)| v.to_string());
    if name.is_empty() || name.contains(['/', '\\']) {
        return err(e.line, "experiment.name must be a nonempty file-name-safe string");
    }
    let horizon: usize = match (kind, e.parsed("horizon", "an integer")?) {
        (_, Some(h)) => h,
        (ExperimentKind::Game, None) => return err(e.line, "missing experiment.horizon"),
        (_, None) => 1,
    };
    let repetitions: usize = e.parsed("repetitions", "an integer")?.unwrap_or(10);
    let delta: f64 = e.parsed("delta", "a number")?.unwrap_or(0.05);
    let grid: usize =
        e.parsed("grid", "an integer")?.unwrap_or(if kind == ExperimentKind::BoundsCompare { 1001 } else { 51 });
    let p_max: f64 = e.parsed("p_max", "a number")?.unwrap_or(1.0);
    let line_of = |k: &str| e.str(k).map_or(e.line, |(_, l)| l);
    if horizon == 0 {
        return err(line_of("horizon"), "experiment.horizon must be at least 1");
    }
    if repetitions == 0 {
        return err(line_of("repetitions"), "experiment.repetitions must be at least 1");
    }
    if !(delta > 0.0 && delta < 1.0) {
        return err(line_of("delta"), "experiment.delta must lie in (0, 1)");
    }
    if grid < 2 {
        return err(line_of("grid"), "experiment.grid must be at least 2");
    }
    if !(p_max > 0.0 && p_max <= 1.0) {
        return err(line_of("p_max"), "experiment.p_max must lie in (0, 1]");
    }
    let default_x = match kind {
        ExperimentKind::Game => "t",
        ExperimentKind::BoundsCompare => "empirical mean",
        ExperimentKind::SplitKlCompare | ExperimentKind::UnexpectedBernsteinCompare => "mass of the middle value",
        ExperimentKind::PacBayesAggregate => "hypotheses",
        ExperimentKind::RecursivePb => "stages",
    };
    let default_y = match kind {
        ExperimentKind::Game => "regret",
        ExperimentKind::BoundsCompare => "bound",
        ExperimentKind::SplitKlCompare | ExperimentKind::UnexpectedBernsteinCompare => "bound on p - mean",
        _ => "loss",
    };
    let cfg = ExperimentConfig {
        name,
        kind,
        horizon,
        repetitions,
        seed: e.parsed("seed", "a 64-bit unsigned integer")?.unwrap_or(0),
        delta,
        output: e.str("output").map(|(v, _)| base.join(v)),
        x_label: e.str("x_label").map_or(default_x.to_string(), |(v, _)| v.to_string()),
        y_label: e.str("y_label").map_or(default_y.to_string(), |(v, _)| v.to_string()),
        metric,
        n: e.parsed("n", "an integer")?.unwrap_or(if kind == ExperimentKind::BoundsCompare { 1000 } else { 100 }),
        grid,
        p_max,
        hypotheses: e.list("hypotheses", "integers")?.unwrap_or_else(|| vec![10, 20, 50, 100]),
        stages: e.list("stages", "integers")?.unwrap_or_else(|| vec![1, 2, 3, 4]),
        environments,
        policies,
    };
    if cfg.n == 0 {
        return err(line_of("n"), "experiment.n must be at least 1");
    }
    if cfg.hypotheses.contains(&0) || cfg.stages.contains(&0) {
        return err(e.line, "experiment.hypotheses and experiment.stages must be positive");
    }
    if kind == ExperimentKind::Game {
        if cfg.environments.is_empty() || cfg.policies.is_empty() {
            return err(e.line, "a game needs at least one [environment NAME] and one [policy NAME]");
        }
        for p in &cfg.policies {
            for n in p.environments.iter().flatten() {
                if !cfg.environments.iter().any(|e| &e.name == n) {
                    return err(p.line, format!("policy.{}.environments names unknown environment {n}", p.name));
                }
            }
        }
    } else if let Some(s) = secs.iter().find(|s| s.header != "experiment") {
        return err(s.line, format!("[{}] sections only apply to game experiments", s.header));
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MIN: &str = "[experiment]\nhorizon = 100\n[environment e]\nkind = bernoulli\nloss_means = 0.2, 0.4\n[policy p]\nkind = exp3\n";

    #[test]
    fn minimal_defaults() {
        let c = parse_config(MIN, Path::new(".")).unwrap();
        assert_eq!(c.delta, 0.05);
        assert_eq!(c.repetitions, 10);
        assert_eq!(c.kind, ExperimentKind::Game);
        assert_eq!(
            c.environments[0].kind,
            EnvKind::Bernoulli { loss_means: vec![0.2, 0.4], feedback: Observation::Bandit }
        );
        assert_eq!(c.policies[0].kind, PolicyKind::Exp3(Exp3Rate::Anytime));
    }

    #[test]
    fn duplicate_key_names_line() {
        let text = "[experiment]\nhorizon = 100\n# c\nhorizon = 200\n";
        match parse_config(text, Path::new(".")) {
            Err(Error::Config { line, msg }) => {
                assert_eq!(line, 4);
                assert!(msg.contains("duplicate"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn strictness() {
        for bad in [
            MIN.replace("horizon = 100", "horizon = 100\nhorizn = 3"),
            MIN.replace("kind = exp3", "kind = exp9"),
            MIN.replace("horizon = 100", "horizon = ten"),
            MIN.replace("[policy p]", "[polcy p]"),
            MIN.replace("loss_means = 0.2, 0.4", "loss_means = 0.2, 1.4"),
            MIN.replace("kind = exp3", "kind = exp3\neta = fast"),
            MIN.replace("kind = exp3", "kind = exp3\nenvironments = nope"),
            "horizon = 3\n".to_string(),
        ] {
            assert!(matches!(parse_config(&bad, Path::new(".")), Err(Error::Config { .. })), "{bad}");
        }
    }

    #[test]
    fn gap_means() {
        let text = MIN.replace("loss_means = 0.2, 0.4", "arms = 4\ngap = 0.125");
        let c = parse_config(&text, Path::new(".")).unwrap();
        assert_eq!(
            c.environments[0].kind,
            EnvKind::Bernoulli { loss_means: vec![0.5, 0.625, 0.625, 0.625], feedback: Observation::Bandit }
        );
    }

    #[test]
    fn ucb_vs_exp3_preset() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../presets/ucb_vs_exp3.cfg");
        let text = std::fs::read_to_string(&path).unwrap();
        let c = parse_config(&text, path.parent().unwrap()).unwrap();
        assert_eq!(c.horizon, 10_000);
        assert_eq!(c.repetitions, 20);
        let mut ks: Vec<usize> = c
            .environments
            .iter()
            .map(|e| match &e.kind {
                EnvKind::Bernoulli { loss_means, .. } => loss_means.len(),
                _ => 0,
            })
            .collect();
        ks.sort();
        ks.dedup();
        assert_eq!(ks, vec![2, 4, 8, 16]);
    }
}
