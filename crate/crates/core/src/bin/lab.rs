use boundlab::environments::{parse_log, replay_importance_weighted, replay_rejection_sampling};
use boundlab::lab::{
    bounds_compare, emit_csv, parse_config, render_plot, run_experiment, selftest, AggregateTrace, PlotStyle,
    PolicyKind,
};
use boundlab::online_policies::UcbParam;
use boundlab::rng::rng_from;
use boundlab::Error;
use clap::{Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "lab", version, about = "Concentration bounds and bandit experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run an experiment file.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the number of repetitions.
        #[arg(long)]
        reps: Option<usize>,
        /// Also write an SVG plot.
        #[arg(long)]
        plot: bool,
    },
    /// Hoeffding, kl and Pinsker bounds over a grid of empirical means.
    BoundsCompare {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 0.01)]
        delta: f64,
        #[arg(long, default_value_t = 1001)]
        grid: usize,
        #[arg(long, default_value = "out/bounds-compare")]
        out: PathBuf,
    },
    /// Evaluate a policy on a logged data file.
    Replay {
        #[arg(long)]
        log: PathBuf,
        #[arg(long, value_enum)]
        policy: ReplayPolicy,
        #[arg(long, value_enum, default_value = "rs")]
        mode: Mode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Arm played by the fixed policy.
        #[arg(long, default_value_t = 0)]
        arm: usize,
    },
    /// Run the built-in invariant checks.
    Selftest,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReplayPolicy {
    Ucb1,
    Ucb1Original,
    Exp3,
    Uniform,
    Fixed,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Iw,
    Rs,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. } => 2,
        _ => 3,
    }
}

fn write_outputs(traces: &[AggregateTrace], dir: &Path, name: &str, style: Option<&PlotStyle>) -> Result<(), Error> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let csv = dir.join(format!("{name}.csv"));
    emit_csv(traces, &csv)?;
    println!("wrote {}", csv.display());
    if let Some(style) = style {
        let svg = dir.join(format!("{name}.svg"));
        render_plot(traces, style, &svg)?;
        println!("wrote {}", svg.display());
    }
    Ok(())
}

fn summarize(traces: &[AggregateTrace]) {
    for t in traces {
        if let (Some(x), Some(m), Some(s)) = (t.xs.last(), t.mean.last(), t.std.last()) {
            println!("{:<40} x={:<10} mean={:<14.6} std={:.6}", t.series, x, m, s);
        }
    }
}

fn run(cmd: Cmd) -> Result<(), Error> {
    match cmd {
        Cmd::Run { config, out, seed, reps, plot } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| Error::Config { line: 0, msg: format!("{}: {e}", config.display()) })?;
            let base = config.parent().unwrap_or(Path::new("."));
            let mut cfg = parse_config(&text, base)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(r) = reps {
                if r == 0 {
                    return Err(Error::Config { line: 0, msg: "--reps must be at least 1".into() });
                }
                cfg.repetitions = r;
            }
            let dir = out.or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("out").join(&cfg.name));
            let res = run_experiment(&cfg)?;
            summarize(&res.traces);
            let style =
                PlotStyle { title: cfg.name.clone(), x_label: cfg.x_label.clone(), y_label: cfg.y_label.clone() };
            write_outputs(&res.traces, &dir, &cfg.name, plot.then_some(&style))
        }
        Cmd::BoundsCompare { n, delta, grid, out } => {
            if n == 0 || !(delta > 0.0 && delta < 1.0) || grid < 2 {
                return Err(Error::Config { line: 0, msg: "need n >= 1, delta in (0, 1) and grid >= 2".into() });
            }
            let (names, xs, curves) = bounds_compare(n, delta, grid, 1.0)?;
            let traces: Vec<AggregateTrace> = names
                .iter()
                .zip(curves)
                .map(|(s, c)| AggregateTrace { series: s.clone(), xs: xs.clone(), std: vec![0.0; c.len()], mean: c })
                .collect();
            summarize(&traces[..1]);
            let style = PlotStyle {
                title: format!("bounds on p, n = {n}, delta = {delta}"),
                x_label: "empirical mean".into(),
                y_label: "bound".into(),
            };
            write_outputs(&traces, &out, "bounds-compare", Some(&style))
        }
        Cmd::Replay { log, policy, mode, seed, arm } => {
            let text = std::fs::read_to_string(&log).map_err(|e| Error::Io(format!("{}: {e}", log.display())))?;
            let (k, records) = parse_log(&text)?;
            let kind = match policy {
                ReplayPolicy::Ucb1 => PolicyKind::Ucb1(UcbParam::Improved),
                ReplayPolicy::Ucb1Original => PolicyKind::Ucb1(UcbParam::Original),
                ReplayPolicy::Exp3 => PolicyKind::Exp3(boundlab::lab::Exp3Rate::Anytime),
                ReplayPolicy::Uniform => PolicyKind::Uniform,
                ReplayPolicy::Fixed => PolicyKind::Fixed(arm),
            };
            let mut p = boundlab::lab::build_policy(&kind, k, records.len().max(1), 0)?;
            let mut rng = rng_from(seed);
            let tr = match mode {
                Mode::Iw => replay_importance_weighted(p.as_mut(), &records, k, &mut rng)?,
                Mode::Rs => replay_rejection_sampling(p.as_mut(), &records, k, &mut rng)?,
            };
            println!(
                "K={k} records={} consumed={} effective_horizon={}",
                records.len(),
                tr.consumed,
                tr.effective_horizon
            );
            println!("mean_reward={:.6}", tr.mean_reward());
            Ok(())
        }
        Cmd::Selftest => {
            let report = selftest();
            for (name, ok, detail) in &report.checks {
                println!(
                    "{} {name}{}",
                    if *ok { "PASS" } else { "FAIL" },
                    if detail.is_empty() { String::new() } else { format!(": {detail}") }
                );
            }
            if report.passed() {
                Ok(())
            } else {
                Err(Error::Domain("self test failed".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
