//! Experiment runner: config files, seeded repetitions, aggregation, CSV and
//! SVG output.

mod config;
mod output;
mod selftest;

pub use config::{
    parse_config, EnvConfig, EnvKind, Exp3Rate, ExperimentConfig, ExperimentKind, HedgeRate, LogSource, Metric,
    PolicyConfig, PolicyKind,
};
pub use output::{csv_string, downsample, emit_csv, format_value, parse_csv, render_plot, render_svg, PlotStyle};
pub use selftest::{selftest, SelfTestReport};

use crate::concentration::{
    hoeffding_radius, kl_mean_bound, split_kl_mean_bound, unexpected_bernstein_mean_bound, KlVariant, LambdaGrid,
    Sample, Sides, SplitGrid,
};
use crate::divergences::{kl_inverse, pinsker_relaxations, Direction, ProbVec};
use crate::environments::{
    make_ftl_breaker, make_ucb_breaker, parse_log, play, replay_importance_weighted, replay_rejection_sampling,
    synthetic_log, BernoulliEnv, Environment, ExpertAdviceEnv, GameTranscript, LogRecord, ReplayMode,
};
use crate::error::{Error, Result};
use crate::online_policies::{
    DoublingHedge, EpsilonFirst, Exp3, Exp3Variant, Exp4, FixedArm, Ftl, Hedge, HedgeEta, Observation, Policy, Ucb1,
    UniformPolicy,
};
use crate::pac_bayes::{alternating_minimize, recursive_pb, LossTable, RecursiveConfig};
use crate::rng::{rng_from, split, SimRng};
use rand::Rng;
use rayon::prelude::*;

/// Mean and population standard deviation across repetitions of one series.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateTrace {
    pub series: String,
    /// Abscissa: round index, grid value, class size, …
    pub xs: Vec<f64>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub traces: Vec<AggregateTrace>,
    /// `raw[i][r]` is repetition r of series i.
    pub raw: Vec<Vec<Vec<f64>>>,
}

/// Two-pass mean and population std over equally long runs.
pub fn aggregate(series: &str, xs: Vec<f64>, runs: &[Vec<f64>]) -> AggregateTrace {
    let len = xs.len();
    let r = runs.len() as f64;
    let mut mean = vec![0.0; len];
    let mut std = vec![0.0; len];
    for i in 0..len {
        let m = runs.iter().map(|run| run[i]).sum::<f64>() / r;
        let v = runs.iter().map(|run| (run[i] - m).powi(2)).sum::<f64>() / r;
        mean[i] = m;
        std[i] = v.sqrt();
    }
    AggregateTrace { series: series.to_string(), xs, mean, std }
}

/// Worker count: `LAB_THREADS` when set to a positive integer.
pub fn thread_count() -> Option<usize> {
    std::env::var("LAB_THREADS").ok()?.trim().parse().ok().filter(|n| *n > 0)
}

fn in_pool<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count() {
        b = b.num_threads(n);
    }
    let pool = b.build().map_err(|e| Error::Io(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let (names, xs, reps) = match cfg.kind {
        ExperimentKind::Game => return run_game(cfg),
        ExperimentKind::BoundsCompare => {
            let (names, xs, curves) = bounds_compare(cfg.n, cfg.delta, cfg.grid, cfg.p_max)?;
            (names, xs, vec![curves])
        }
        ExperimentKind::SplitKlCompare | ExperimentKind::UnexpectedBernsteinCompare => {
            let xs: Vec<f64> = (0..cfg.grid).map(|i| i as f64 / (cfg.grid - 1) as f64).collect();
            let second = if cfg.kind == ExperimentKind::SplitKlCompare { "split-kl" } else { "unexpected-bernstein" };
            let reps = repeat(cfg, |seed| ternary_compare(cfg.kind, cfg.n, cfg.delta, &xs, seed))?;
            (vec!["kl".to_string(), second.to_string()], xs, reps)
        }
        ExperimentKind::PacBayesAggregate => {
            let xs = cfg.hypotheses.iter().map(|m| *m as f64).collect();
            let reps = repeat(cfg, |seed| aggregation_run(&cfg.hypotheses, cfg.n, cfg.delta, seed))?;
            (vec!["bound".into(), "posterior-loss".into(), "best-loss".into()], xs, reps)
        }
        ExperimentKind::RecursivePb => {
            let xs = cfg.stages.iter().map(|t| *t as f64).collect();
            let m = cfg.hypotheses[0];
            let reps = repeat(cfg, |seed| recursive_run(&cfg.stages, m, cfg.n, cfg.delta, seed))?;
            (vec!["recursive-bound".into(), "recursive-posterior-loss".into(), "pb-lambda-bound".into()], xs, reps)
        }
    };
    let mut out = ExperimentOutput { traces: vec![], raw: vec![] };
    for (i, name) in names.iter().enumerate() {
        let runs: Vec<Vec<f64>> = reps.iter().map(|r| r[i].clone()).collect();
        out.traces.push(aggregate(name, xs.clone(), &runs));
        out.raw.push(runs);
    }
    Ok(out)
}

/// Runs `f(seed_r)` for every repetition and returns results in order.
fn repeat<T: Send>(cfg: &ExperimentConfig, f: impl Fn(u64) -> Result<T> + Sync) -> Result<Vec<T>> {
    in_pool(|| (0..cfg.repetitions).into_par_iter().map(|r| f(split(cfg.seed, r as u64))).collect())?
}

/// Series names, grid and one curve per series.
pub type Curves = (Vec<String>, Vec<f64>, Vec<Vec<f64>>);

/// Upper bounds (hoeffding, kl, pinsker, pinsker-refined) and lower bounds
/// (hoeffding-lower, kl-lower) on p over a grid of empirical means, all
/// clipped to [0, 1].
pub fn bounds_compare(n: usize, delta: f64, grid: usize, p_max: f64) -> Result<Curves> {
    if grid < 2 {
        return Err(Error::Domain("grid needs at least 2 points".into()));
    }
    let names = ["hoeffding", "kl", "pinsker", "pinsker-refined", "hoeffding-lower", "kl-lower"];
    let xs: Vec<f64> = (0..grid).map(|i| p_max * i as f64 / (grid - 1) as f64).collect();
    let rad = hoeffding_radius(n as u64, delta, Sides::One)?;
    let eps = (1.0 / delta).ln() / n as f64;
    let mut curves = vec![Vec::with_capacity(grid); names.len()];
    for &p in &xs {
        let pr = pinsker_relaxations(p, eps)?;
        let vals = [
            (p + rad).min(1.0),
            kl_inverse(p, eps, Direction::Upper)?,
            pr.plain,
            pr.refined_upper,
            (p - rad).max(0.0),
            kl_inverse(p, eps, Direction::Lower)?,
        ];
        for (c, v) in curves.iter_mut().zip(vals) {
            c.push(v);
        }
    }
    Ok((names.iter().map(|s| s.to_string()).collect(), xs, curves))
}

/// Bounds on p − p̂ for a sample from {0, ½, 1} with P(½) = x and
/// P(0) = P(1) = (1 − x)/2: the kl bound and its competitor.
fn ternary_compare(kind: ExperimentKind, n: usize, delta: f64, xs: &[f64], seed: u64) -> Result<Vec<Vec<f64>>> {
    let grid = SplitGrid::new(vec![0.0, 0.5, 1.0])?;
    let lambdas = LambdaGrid::default_for(n as u64, delta, 1.0)?;
    let mut out = vec![Vec::new(); 2];
    for (g, &half) in xs.iter().enumerate() {
        let mut rng = rng_from(split(seed, g as u64));
        let values: Vec<f64> = (0..n)
            .map(|_| {
                let u: f64 = rng.random();
                if u < half {
                    0.5
                } else if u < half + (1.0 - half) / 2.0 {
                    0.0
                } else {
                    1.0
                }
            })
            .collect();
        let sample = Sample::unit(values)?;
        let p_hat = sample.mean();
        let kl = kl_mean_bound(p_hat, n as u64, delta, KlVariant::Direct, Direction::Upper)?.value - p_hat;
        let other = if kind == ExperimentKind::SplitKlCompare {
            split_kl_mean_bound(&sample, &grid, delta)?
        } else {
            unexpected_bernstein_mean_bound(&sample, delta, &lambdas)?
        };
        out[0].push(kl);
        out[1].push(other.get("unclipped").unwrap_or(other.value) - p_hat);
    }
    Ok(out)
}

/// True hypothesis losses spread over [0.05, 0.5].
fn synthetic_class(m: usize, rng: &mut SimRng) -> Vec<f64> {
    (0..m).map(|_| 0.05 + 0.45 * rng.random::<f64>()).collect()
}

fn aggregation_run(sizes: &[usize], n: usize, delta: f64, seed: u64) -> Result<Vec<Vec<f64>>> {
    let mut out = vec![Vec::new(); 3];
    for (i, &m) in sizes.iter().enumerate() {
        let mut rng = rng_from(split(seed, i as u64));
        let mu = synthetic_class(m, &mut rng);
        let table = LossTable::bernoulli(&mu, n, &mut rng)?;
        let res = alternating_minimize(&ProbVec::uniform(m)?, &table, delta, 0)?;
        out[0].push(res.bound.min(1.0));
        out[1].push(res.rho.expect(&mu));
        out[2].push(mu.iter().cloned().fold(f64::INFINITY, f64::min));
    }
    Ok(out)
}

fn recursive_run(stages: &[usize], m: usize, n: usize, delta: f64, seed: u64) -> Result<Vec<Vec<f64>>> {
    let mut rng = rng_from(seed);
    let mu = synthetic_class(m, &mut rng);
    let table = LossTable::bernoulli(&mu, n, &mut rng)?;
    let pi = ProbVec::uniform(m)?;
    let mut out = vec![Vec::new(); 3];
    let flat = alternating_minimize(&pi, &table, delta, 0)?.bound.min(1.0);
    for &t in stages {
        let res = recursive_pb(&table, &pi, delta, &RecursiveConfig::new(t, split(seed, t as u64)))?;
        let last = res.last().expect("at least one stage");
        out[0].push(last.bound.value.min(1.0));
        out[1].push(last.posterior.expect(&mu));
        out[2].push(flat);
    }
    Ok(out)
}

enum EnvInstance {
    Game { env: Box<dyn Environment>, feedback: Observation },
    Replay { k: usize, log: Vec<LogRecord>, mode: ReplayMode },
}

impl EnvInstance {
    fn arms(&self) -> usize {
        match self {
            Self::Game { env, .. } => env.arms(),
            Self::Replay { k, .. } => *k,
        }
    }
    fn experts(&self) -> usize {
        match self {
            Self::Game { env, .. } => env.advice(1).map_or(0, |a| a.len()),
            Self::Replay { .. } => 0,
        }
    }
}

fn instantiate(
    e: &EnvConfig,
    seed: u64,
    horizon: usize,
    file_logs: &[Option<(usize, Vec<LogRecord>)>],
    idx: usize,
) -> Result<EnvInstance> {
    let at = |err: Error| match err {
        Error::Domain(msg) => Error::Config { line: e.line, msg: format!("environment.{}: {msg}", e.name) },
        other => other,
    };
    Ok(match &e.kind {
        EnvKind::Bernoulli { loss_means, feedback } => EnvInstance::Game {
            env: Box::new(BernoulliEnv::new(loss_means.clone(), seed).map_err(at)?),
            feedback: *feedback,
        },
        EnvKind::FtlBreaker { feedback } => {
            EnvInstance::Game { env: Box::new(make_ftl_breaker(horizon).map_err(at)?), feedback: *feedback }
        }
        EnvKind::UcbBreaker { arms, param, feedback } => EnvInstance::Game {
            env: Box::new(make_ucb_breaker(horizon, *arms, *param).map_err(at)?.env),
            feedback: *feedback,
        },
        EnvKind::ExpertAdvice { loss_means, experts } => {
            let base = BernoulliEnv::new(loss_means.clone(), seed).map_err(at)?;
            let env = ExpertAdviceEnv::standard(base, *experts, split(seed, 1)).map_err(at)?;
            EnvInstance::Game { env: Box::new(env), feedback: Observation::Bandit }
        }
        EnvKind::OfflineLog { source, mode } => match source {
            LogSource::Synthetic { reward_means, records } => EnvInstance::Replay {
                k: reward_means.len(),
                log: synthetic_log(reward_means, *records, seed).map_err(at)?,
                mode: *mode,
            },
            LogSource::File(_) => {
                let (k, log) = file_logs[idx].clone().expect("log loaded up front");
                EnvInstance::Replay { k, log, mode: *mode }
            }
        },
    })
}

/// Builds a policy for K arms, horizon T and N experts.
pub fn build_policy(kind: &PolicyKind, k: usize, horizon: usize, experts: usize) -> Result<Box<dyn Policy>> {
    Ok(match kind {
        PolicyKind::Hedge(rate) => Box::new(match rate {
            HedgeRate::Simple => Hedge::with_horizon(k, horizon, HedgeEta::Simple)?,
            HedgeRate::Tight => Hedge::with_horizon(k, horizon, HedgeEta::Tight)?,
            HedgeRate::Anytime => Hedge::anytime(k, 1.0)?,
            HedgeRate::AnytimeTight => Hedge::anytime(k, 2.0)?,
            HedgeRate::Fixed(eta) => Hedge::fixed(k, *eta)?,
        }),
        PolicyKind::Ftl => Box::new(Ftl::new(k)?),
        PolicyKind::Exp3(rate) | PolicyKind::Exp3Rewards(rate) => {
            let v = if matches!(kind, PolicyKind::Exp3(_)) { Exp3Variant::Losses } else { Exp3Variant::Rewards };
            Box::new(match rate {
                Exp3Rate::Anytime => Exp3::anytime(k, v)?,
                Exp3Rate::Horizon => Exp3::with_horizon(k, v, horizon)?,
                Exp3Rate::Fixed(eta) => Exp3::fixed(k, v, *eta)?,
            })
        }
        PolicyKind::Exp4(eta) => {
            if experts == 0 {
                return Err(Error::Domain("exp4 needs an environment with expert advice".into()));
            }
            Box::new(match eta {
                None => Exp4::with_horizon(k, experts, horizon)?,
                Some(e) => Exp4::fixed(k, experts, *e)?,
            })
        }
        PolicyKind::Ucb1(p) => Box::new(Ucb1::new(k, *p)?),
        PolicyKind::EpsilonFirst { gap } => Box::new(EpsilonFirst::from_gap(k, *gap, horizon)?),
        PolicyKind::DoublingHedge => Box::new(DoublingHedge::new(k)?),
        PolicyKind::Uniform => Box::new(UniformPolicy::new(k)?),
        PolicyKind::Fixed(a) => Box::new(FixedArm::new(k, *a)?),
    })
}

fn pick_metric(metric: Metric, tr: &GameTranscript, series: &str) -> Result<Vec<f64>> {
    let auto = match metric {
        Metric::Auto => {
            if tr.expert_pseudo_regret.is_some() {
                Metric::ExpertPseudoRegret
            } else if tr.pseudo_regret.is_some() {
                Metric::PseudoRegret
            } else {
                Metric::Regret
            }
        }
        m => m,
    };
    let v = match auto {
        Metric::Regret => Some(&tr.regret),
        Metric::PseudoRegret => tr.pseudo_regret.as_ref(),
        Metric::ExpectedRegret => tr.expected_regret.as_ref(),
        Metric::ExpertRegret => tr.expert_regret.as_ref(),
        Metric::ExpertPseudoRegret => tr.expert_pseudo_regret.as_ref(),
        Metric::Reward | Metric::Auto => None,
    };
    v.cloned().ok_or_else(|| Error::Domain(format!("{series}: metric {auto:?} is not available for this game")))
}

/// (environment index, policy index) pairs in config order, env-major.
fn game_pairs(cfg: &ExperimentConfig) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for (i, e) in cfg.environments.iter().enumerate() {
        for (j, p) in cfg.policies.iter().enumerate() {
            if p.environments.as_ref().is_none_or(|names| names.contains(&e.name)) {
                pairs.push((i, j));
            }
        }
    }
    pairs
}

fn run_game(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let pairs = game_pairs(cfg);
    // validate compatibility and load log files once
    let mut file_logs = Vec::with_capacity(cfg.environments.len());
    for e in &cfg.environments {
        file_logs.push(match &e.kind {
            EnvKind::OfflineLog { source: LogSource::File(p), .. } => {
                let text = std::fs::read_to_string(p).map_err(|err| Error::Io(format!("{}: {err}", p.display())))?;
                Some(parse_log(&text)?)
            }
            _ => None,
        });
    }
    for &(i, j) in &pairs {
        let (e, p) = (&cfg.environments[i], &cfg.policies[j]);
        let bandit_env = match &e.kind {
            EnvKind::Bernoulli { feedback, .. }
            | EnvKind::FtlBreaker { feedback }
            | EnvKind::UcbBreaker { feedback, .. } => *feedback == Observation::Bandit,
            EnvKind::ExpertAdvice { .. } | EnvKind::OfflineLog { .. } => true,
        };
        let full_policy = matches!(p.kind, PolicyKind::Hedge(_) | PolicyKind::Ftl | PolicyKind::DoublingHedge);
        if bandit_env && full_policy {
            return Err(Error::Config {
                line: p.line,
                msg: format!("policy.{} needs full information but environment.{} is a bandit game", p.name, e.name),
            });
        }
        let advice = matches!(e.kind, EnvKind::ExpertAdvice { .. });
        if matches!(p.kind, PolicyKind::Exp4(_)) && !advice {
            return Err(Error::Config {
                line: p.line,
                msg: format!("policy.{} needs environment.{} to give expert advice", p.name, e.name),
            });
        }
    }
    let horizon = cfg.horizon;
    let reps: Vec<Vec<Vec<f64>>> = repeat(cfg, |seed_r| {
        let mut envs = Vec::with_capacity(cfg.environments.len());
        for (i, e) in cfg.environments.iter().enumerate() {
            envs.push(instantiate(e, split(seed_r, i as u64), horizon, &file_logs, i)?);
        }
        let mut series = Vec::with_capacity(pairs.len());
        for &(i, j) in &pairs {
            let name = format!("{}/{}", cfg.environments[i].name, cfg.policies[j].name);
            let env = &envs[i];
            let mut policy =
                build_policy(&cfg.policies[j].kind, env.arms(), horizon, env.experts()).map_err(|err| {
                    Error::Config { line: cfg.policies[j].line, msg: format!("policy.{}: {err}", cfg.policies[j].name) }
                })?;
            let mut rng = rng_from(split(split(seed_r, 1 << 32 | i as u64), j as u64));
            let run = match env {
                EnvInstance::Game { env, feedback } => {
                    let tr = play(env.as_ref(), policy.as_mut(), horizon, *feedback, &mut rng, false)?;
                    pick_metric(cfg.metric, &tr, &name)?
                }
                EnvInstance::Replay { k, log, mode } => {
                    if !matches!(cfg.metric, Metric::Auto | Metric::Reward) {
                        return Err(Error::Domain(format!("{name}: replay only reports the reward metric")));
                    }
                    let tr = match mode {
                        ReplayMode::ImportanceWeighted => {
                            replay_importance_weighted(policy.as_mut(), log, *k, &mut rng)?
                        }
                        ReplayMode::RejectionSampling => replay_rejection_sampling(policy.as_mut(), log, *k, &mut rng)?,
                    };
                    let mut m = tr.running_mean();
                    m.truncate(horizon);
                    m
                }
            };
            series.push(run);
        }
        Ok(series)
    })?;
    let mut out = ExperimentOutput { traces: vec![], raw: vec![] };
    for (s, &(i, j)) in pairs.iter().enumerate() {
        let name = format!("{}/{}", cfg.environments[i].name, cfg.policies[j].name);
        let mut runs: Vec<Vec<f64>> = reps.iter().map(|r| r[s].clone()).collect();
        // replay horizons differ between repetitions; keep the common prefix
        let len = runs.iter().map(Vec::len).min().unwrap_or(0);
        for r in &mut runs {
            r.truncate(len);
        }
        let xs = (1..=len).map(|t| t as f64).collect();
        out.traces.push(aggregate(&name, xs, &runs));
        out.raw.push(runs);
    }
    Ok(out)
}
