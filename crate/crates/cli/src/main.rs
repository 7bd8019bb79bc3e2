use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use noisy_geom::counterexample::{counterexample_walk, CounterexampleConfig};
use noisy_geom::harness::{run_experiment, scaling, Algorithm, ExperimentConfig, InstanceSource};
use noisy_geom::instance::{generate_instance, Instance, Kind};
use noisy_geom::Params;

#[derive(Parser)]
#[command(name = "ngeo", version, about = "Noisy-primitive geometry experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate an instance file.
    Gen {
        #[arg(long)]
        kind: Kind,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output file; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run trials and report success against exact references.
    Run(RunArgs),
    /// Check an instance file and one or more trials on it against the exact
    /// reference; defaults to noise-free.
    Verify(RunArgs),
    /// Generalized-walk stress scenario on a complete binary tree.
    Counterexample {
        /// One or more powers of two, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "1024")]
        n: Vec<u64>,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Constant K of the advance probability K log log n / log n.
        #[arg(long, default_value_t = 0.2)]
        k: f64,
        #[arg(long, default_value_t = 2.0)]
        c: f64,
        /// Fail unless max/min of the normalized means stays within this.
        #[arg(long)]
        max_band: Option<f64>,
        /// Fail unless every n reaches the leaf goal at least this often.
        #[arg(long)]
        min_leaf_rate: Option<f64>,
        /// JSON report path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one algorithm at several sizes and report normalized costs.
    Scaling {
        #[arg(long)]
        algo: Algorithm,
        #[arg(long, value_delimiter = ',', default_value = "512,2048,8192")]
        n: Vec<usize>,
        #[arg(long, default_value_t = 0.1)]
        p: f64,
        #[arg(long, default_value_t = 2.0)]
        c: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        trials: u64,
        #[arg(long)]
        kind: Option<Kind>,
        /// Fail if calls per normalizer deviate from their mean by more.
        #[arg(long)]
        max_spread: Option<f64>,
        #[arg(long)]
        min_success: Option<f64>,
        /// CSV report path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    algo: Algorithm,
    #[arg(long, default_value_t = 256)]
    n: usize,
    /// Primitive error probability; `verify` defaults to 0.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, default_value_t = 2.0)]
    c: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    trials: Option<u64>,
    /// Kind of generated instance; the algorithm's natural kind if omitted.
    #[arg(long, conflicts_with = "input")]
    kind: Option<Kind>,
    /// Read the instance from this file instead of generating it.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Report stem: writes STEM.csv, STEM.json and STEM.timing.csv.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    emit_trapezoids: bool,
    #[arg(long)]
    instrumented: bool,
    /// Point-location queries (trapmap) or searches (bst-search) per trial.
    #[arg(long, default_value_t = 0)]
    queries: usize,
    /// Exit with failure below this success rate.
    #[arg(long)]
    min_success: Option<f64>,
}

fn read_instance(path: &PathBuf) -> Result<Instance> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Instance::parse(&text)?)
}

fn experiment(a: &RunArgs, default_p: f64, default_trials: u64) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::new(a.algo, a.n, a.p.unwrap_or(default_p), a.seed, a.trials.unwrap_or(default_trials))
        .with_c(a.c);
    cfg.source = match &a.input {
        Some(path) => InstanceSource::Given(read_instance(path)?),
        None => InstanceSource::Generated(a.kind),
    };
    cfg.emit_trapezoids = a.emit_trapezoids;
    cfg.instrumented = a.instrumented;
    cfg.queries = a.queries;
    Ok(cfg)
}

fn run(a: &RunArgs, default_p: f64, default_trials: u64, default_min: f64) -> Result<bool> {
    let cfg = experiment(a, default_p, default_trials)?;
    let rep = run_experiment(&cfg)?;
    if let Some(stem) = &a.out {
        rep.write(stem)?;
    }
    println!("{}", rep.summary_json());
    for r in rep.records.iter().filter(|r| r.error.is_some()).take(5) {
        eprintln!("trial {}: {}", r.trial, r.error.as_deref().unwrap_or(""));
    }
    Ok(rep.success_rate() >= a.min_success.unwrap_or(default_min))
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Gen { kind, n, seed, out } => {
            let text = generate_instance(kind, n, seed)?.to_text();
            match out {
                Some(p) => std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?,
                None => print!("{text}"),
            }
            Ok(true)
        }
        Cmd::Run(a) => run(&a, 0.1, 10, 0.99),
        Cmd::Verify(a) => {
            if a.input.is_none() {
                bail!("verify needs --in FILE");
            }
            run(&a, 0.0, 1, 1.0)
        }
        Cmd::Counterexample { n, trials, seed, k, c, max_band, min_leaf_rate, out } => {
            let mut reports = Vec::new();
            println!("n,threshold,mean_steps,normalized,path_budget,leaf_rate,unterminated,escape_estimate,escape_limit");
            for n in n {
                let cfg = CounterexampleConfig { n, trials, seed, k, params: Params::with_c(c) };
                let r = counterexample_walk(&cfg)?;
                println!(
                    "{},{},{:.3},{:.4},{:.1},{:.4},{},{:.3e},{:.3e}",
                    r.n,
                    r.threshold,
                    r.mean_steps,
                    r.normalized,
                    r.path_budget,
                    r.leaf_rate,
                    r.unterminated,
                    r.escape_estimate,
                    r.escape_limit
                );
                reports.push(r);
            }
            if let Some(p) = out {
                std::fs::write(&p, serde_json::to_string_pretty(&reports)? + "\n")?;
            }
            let norms: Vec<f64> = reports.iter().map(|r| r.normalized).collect();
            let band = norms.iter().cloned().fold(f64::MIN, f64::max) / norms.iter().cloned().fold(f64::MAX, f64::min);
            let mut ok = true;
            if let Some(b) = max_band {
                ok &= band <= b;
            }
            if let Some(m) = min_leaf_rate {
                ok &= reports.iter().all(|r| r.leaf_rate >= m);
            }
            Ok(ok)
        }
        Cmd::Scaling { algo, n, p, c, seed, trials, kind, max_spread, min_success, out } => {
            let mut base = ExperimentConfig::new(algo, 0, p, seed, trials).with_c(c);
            base.source = InstanceSource::Generated(kind);
            let rep = scaling(&base, &n)?;
            let csv = rep.to_csv();
            print!("{csv}");
            println!("# calls_ratio_spread {:.4} size_ratio_spread {:.4}", rep.calls_ratio_spread, rep.size_ratio_spread);
            if let Some(p) = out {
                std::fs::write(&p, csv)?;
            }
            let mut ok = true;
            if let Some(s) = max_spread {
                ok &= rep.calls_ratio_spread <= s;
            }
            if let Some(m) = min_success {
                ok &= rep.rows.iter().all(|r| r.success_rate >= m);
            }
            Ok(ok)
        }
    }
}
