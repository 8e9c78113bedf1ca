use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use matroid_secretary::classical::{
    evaluate_policy_enumeration, evaluate_policy_exact, harmonic_policy, one_over_e_policy, simulate_policy,
    AcceptanceSchedule, MAX_ENUMERATION,
};
use matroid_secretary::harness::stopping_point;
use matroid_secretary::harness::{
    hardness_sweep, run_experiment, worstcase_order_search, ExperimentConfig, SingleChoice,
};
use matroid_secretary::lp::{build_secretary_lp, lp_bounds};
use matroid_secretary::principal::{principal_minors, principal_partition_matroid};
use matroid_secretary::scalar::{fraction_string, Scalar};
use matroid_secretary::{MatroidOracle, Rational};

#[derive(Parser)]
#[command(name = "msec", version, about = "Matroid secretary experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassicalPolicy {
    Harmonic,
    OneOverE,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Exact,
    Enumerate,
    Simulate,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and report against its declared bound.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output file; `.csv` writes per-trial rows, anything else JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search arrival orders for the one that hurts the policy most.
    Worstcase {
        #[arg(long)]
        config: PathBuf,
        /// Try every order (n <= 7) instead of the heuristic adversaries.
        #[arg(long)]
        exhaustive: bool,
    },
    /// Principal sequence of a matroid file.
    PrincipalSeq {
        #[arg(long)]
        matroid: PathBuf,
    },
    /// Solve the secretary LP exactly for horizon N.
    Lp {
        #[arg(long = "n")]
        horizon: usize,
        #[arg(long)]
        weakened: bool,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Success probability of a classical policy.
    PolicyEval {
        #[arg(long, value_enum)]
        policy: ClassicalPolicy,
        /// Horizon the policy is built for; defaults to `--n`.
        #[arg(long = "N")]
        horizon: Option<usize>,
        /// Number of candidates that actually arrive.
        #[arg(long = "n")]
        actual: usize,
        #[arg(long, value_enum, default_value = "exact")]
        method: Method,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Sweep single-choice policies over the hard i.i.d. instance.
    Hardness {
        #[arg(long)]
        gamma: f64,
        /// Number of blocks; the stream holds 2^(L+1) - 2 draws.
        #[arg(long)]
        levels: u32,
        /// Comma-separated: `harmonic`, `threshold:J`.
        #[arg(long, value_delimiter = ',', default_value = "harmonic,threshold:3")]
        policies: Vec<String>,
        #[arg(long, default_value_t = 20_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn read_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut c = ExperimentConfig::from_json(&text)?;
    // Matroid files are resolved next to the config.
    if let matroid_secretary::harness::MatroidSource::File { file } = &mut c.matroid {
        if file.is_relative() {
            if let Some(dir) = path.parent() {
                *file = dir.join(&*file);
            }
        }
    }
    Ok(c)
}

fn print(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json values serialize"));
}

fn exit_for(pass: Option<bool>) -> ExitCode {
    if pass == Some(false) {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn simulate(config: &Path, out: Option<&Path>) -> Result<ExitCode> {
    let report = run_experiment(&read_config(config)?)?;
    let csv = out.is_some_and(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")));
    let text = if csv { report.to_csv()? } else { report.to_json() };
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => println!("{text}"),
    }
    eprintln!(
        "{}: mean {:.6} (stderr {:.6}), opt {:.6}, bound {:?}, pass {:?}",
        report.policy, report.mean, report.stderr, report.opt_mean, report.bound, report.pass
    );
    Ok(exit_for(report.pass))
}

fn worstcase(config: &Path, exhaustive: bool) -> Result<ExitCode> {
    let wc = worstcase_order_search(&read_config(config)?, exhaustive)?;
    let candidates: Vec<Value> = wc.candidates.iter().map(|(l, v)| json!({"order": l, "mean": v})).collect();
    print(&json!({
        "label": wc.label,
        "order": wc.order,
        "candidates": candidates,
        "report": serde_json::to_value(&wc.report)?,
    }));
    Ok(exit_for(wc.report.pass))
}

fn principal_seq(path: &Path) -> Result<()> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let m = MatroidOracle::from_json(&text)?;
    let d = principal_minors(&m)?;
    let parts: Vec<Value> = d
        .parts
        .iter()
        .map(|p| json!({"elements": p.elements, "rank": p.rank, "density": fraction_string(&p.density)}))
        .collect();
    let partition = principal_partition_matroid(&d)?;
    print(&json!({
        "ground_size": d.ground_size,
        "parts": parts,
        "loops": d.loops,
        "partition_matroid": partition.to_spec(),
    }));
    Ok(())
}

fn lp(horizon: usize, weakened: bool, format: Format) -> Result<()> {
    let sol = build_secretary_lp::<Rational>(horizon, weakened)?.solve()?;
    let (lower, upper) = lp_bounds::<Rational>(horizon);
    match format {
        Format::Json => print(&json!({
            "N": horizon,
            "weakened": weakened,
            "status": sol.status,
            "alpha": fraction_string(&sol.alpha),
            "alpha_float": sol.alpha.as_f64(),
            "p": sol.p.iter().map(fraction_string).collect::<Vec<_>>(),
            "lower_bound": fraction_string(&lower),
            "upper_bound": fraction_string(&upper),
        })),
        Format::Csv => {
            println!("i,p_i,p_i_float");
            for (i, p) in sol.p.iter().enumerate() {
                println!("{},{},{}", i + 1, fraction_string(p), p.as_f64());
            }
        }
    }
    Ok(())
}

fn policy_eval(
    policy: ClassicalPolicy,
    horizon: usize,
    n: usize,
    method: Method,
    trials: u64,
    seed: u64,
) -> Result<()> {
    let schedule: AcceptanceSchedule<Rational> = match policy {
        ClassicalPolicy::Harmonic => harmonic_policy(horizon)?,
        ClassicalPolicy::OneOverE => one_over_e_policy(horizon)?,
    };
    let name = match policy {
        ClassicalPolicy::Harmonic => "harmonic",
        ClassicalPolicy::OneOverE => "one-over-e",
    };
    let (value, float) = match method {
        Method::Exact => {
            let v = evaluate_policy_exact(&schedule, n)?;
            (Value::from(fraction_string(&v)), v.as_f64())
        }
        Method::Enumerate => {
            if n > MAX_ENUMERATION {
                bail!("enumeration supports n <= {MAX_ENUMERATION}");
            }
            let v = evaluate_policy_enumeration(&schedule, n)?;
            (Value::from(fraction_string(&v)), v.as_f64())
        }
        Method::Simulate => {
            let wins = simulate_policy(&schedule, n, trials, seed)?;
            let p = wins as f64 / trials as f64;
            (json!({"wins": wins, "trials": trials, "seed": seed}), p)
        }
    };
    print(&json!({"policy": name, "N": horizon, "n": n, "value": value, "float_value": float}));
    Ok(())
}

fn hardness(gamma: f64, levels: u32, policies: &[String], trials: u64, seed: u64) -> Result<()> {
    if levels == 0 || levels > 40 {
        bail!("levels must lie in 1..=40");
    }
    let family: Vec<SingleChoice> = policies.iter().map(|s| SingleChoice::parse(s)).collect::<Result<_, _>>()?;
    let report = hardness_sweep(gamma, stopping_point(levels), &family, trials, seed)?;
    print(&serde_json::to_value(&report)?);
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Simulate { config, out } => simulate(&config, out.as_deref()),
        Command::Worstcase { config, exhaustive } => worstcase(&config, exhaustive),
        Command::PrincipalSeq { matroid } => principal_seq(&matroid).map(|()| ExitCode::SUCCESS),
        Command::Lp { horizon, weakened, format } => lp(horizon, weakened, format).map(|()| ExitCode::SUCCESS),
        Command::PolicyEval { policy, horizon, actual, method, trials, seed } => {
            policy_eval(policy, horizon.unwrap_or(actual), actual, method, trials, seed).map(|()| ExitCode::SUCCESS)
        }
        Command::Hardness { gamma, levels, policies, trials, seed } => {
            hardness(gamma, levels, &policies, trials, seed).map(|()| ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
