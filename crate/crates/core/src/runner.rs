//! Command-line driver: runs one experiment and writes its output directory.
//!
//! Layout of the output directory:
//!
//! * `manifest.json`: command, seed, version, SHA-256 of the config file,
//!   the echoed config, the exit status and an inventory of the other files;
//! * `report.json`: the experiment report;
//! * `trace_*.csv`: time series and scan tables;
//! * `timing.json`: wall-clock data, kept apart so that everything else is
//!   reproducible byte for byte.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, Experiment};
use crate::diagnostics::{
    dissipation_scan, drift_scan, gaussian_stationary_covariance, gibbs_invariance_test, observable_decay_fit,
    stationary_moment_test,
};
use crate::dynamics::{integrate, integrate_deterministic, run_counterexample, DeterministicOptions, IntegrateOptions};
use crate::error::Error;
use crate::graph::{builtin_fixture, controls, FIXTURE_NAMES};
use crate::potentials::check_conditions;
use crate::rng;

/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "OSCNET_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Validation,
    Blowup,
    Inconclusive,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Validation => 1,
            Status::Blowup => 2,
            Status::Inconclusive => 3,
        }
    }

    fn of_error(e: &Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::Io(_) => Status::Validation,
            Error::Blowup { .. } | Error::OutsideValidityRegion { .. } => Status::Blowup,
            Error::Diagnostic(_) => Status::Inconclusive,
        }
    }
}

/// Result of one experiment, before anything is written.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: Status,
    pub report: Value,
    /// `(file name, CSV text)`
    pub tables: Vec<(String, String)>,
    pub partial: bool,
}

impl Outcome {
    fn done(report: impl Serialize, tables: Vec<(String, String)>, inconclusive: bool) -> Self {
        Self {
            status: if inconclusive { Status::Inconclusive } else { Status::Ok },
            report: serde_json::to_value(report).expect("reports serialize"),
            tables,
            partial: false,
        }
    }

    fn failed(e: Error) -> Self {
        let mut tables = Vec::new();
        let mut partial = false;
        if let Error::Blowup {
            partial: Some(trace), ..
        } = &e
        {
            tables.push(("trace_partial.csv".to_string(), trace.to_csv()));
            partial = true;
        }
        Self {
            status: Status::of_error(&e),
            report: json!({ "error": e.to_string() }),
            tables,
            partial,
        }
    }
}

fn levels_csv<T>(header: &str, rows: &[T], line: impl Fn(&T) -> String) -> String {
    let mut out = format!("{header}\n");
    for r in rows {
        out.push_str(&line(r));
        out.push('\n');
    }
    out
}

/// Runs the experiment of `config` on the current rayon pool.
pub fn execute(config: &ExperimentConfig) -> Outcome {
    match execute_inner(config) {
        Ok(o) => o,
        Err(e) => Outcome::failed(e),
    }
}

fn execute_inner(config: &ExperimentConfig) -> crate::Result<Outcome> {
    let model = config.model()?;
    let seed = config.seed;
    let csv = config.output.csv();
    let needs = || model.as_ref().ok_or_else(|| Error::InvalidArgument("the experiment needs a model".into()));
    match &config.experiment {
        Experiment::Check(options) => {
            let m = needs()?;
            let report = check_conditions(m, options)?;
            let names = m.topology().names().to_vec();
            let passed = report.all_passed();
            Ok(Outcome::done(
                json!({ "vertices": names, "all_passed": passed, "conditions": report }),
                Vec::new(),
                false,
            ))
        }
        Experiment::Simulate(p) => {
            let m = needs()?;
            let z0 = p.initial.build(m)?;
            let mut runs = Vec::new();
            let mut tables = Vec::new();
            for i in 0..p.trajectories {
                let trace = if p.noise {
                    let mut opts = IntegrateOptions::new(p.t_end, config.integrator.h);
                    opts.record_every = config.output.record_every;
                    let mut stream = rng::seed_stream(seed, i as u64);
                    integrate(m, &z0, &opts, &mut stream)
                } else {
                    let mut opts = DeterministicOptions::new(p.t_end, config.integrator.h);
                    opts.record_every = config.output.record_every;
                    opts.friction = true;
                    integrate_deterministic(m, &z0, &opts)
                };
                let trace = match trace {
                    Ok(t) => t,
                    Err(Error::Blowup { step, time, partial }) => {
                        let mut out = Outcome::failed(Error::Blowup {
                            step,
                            time,
                            partial: None,
                        });
                        out.report = json!({
                            "error": format!("trajectory {i} blew up at step {step} (t = {time})"),
                            "completed": runs,
                        });
                        tables.extend(partial.map(|t| (format!("trace_{i}_partial.csv"), t.to_csv())));
                        out.tables = tables;
                        out.partial = true;
                        return Ok(out);
                    }
                    Err(e) => return Err(e),
                };
                let last = trace.len() - 1;
                runs.push(json!({
                    "trajectory": i,
                    "stream": i,
                    "samples": trace.len(),
                    "final_time": trace.times[last],
                    "energy_start": trace.energy[0],
                    "energy_end": trace.energy[last],
                    "dissipation": trace.dissipation[last],
                    "work": trace.work[last],
                    "input_rate": trace.input_rate,
                    "final_residual": trace.final_residual(),
                    "max_abs_residual": trace.residual.iter().fold(0.0f64, |a, r| a.max(r.abs())),
                }));
                if csv {
                    tables.push((format!("trace_{i}.csv"), trace.to_csv()));
                }
            }
            Ok(Outcome::done(
                json!({ "noise": p.noise, "h": config.integrator.h, "trajectories": runs }),
                tables,
                false,
            ))
        }
        Experiment::EquilibriumTest(p) => {
            let m = needs()?;
            let gibbs = match &p.gibbs {
                Some(g) => Some(gibbs_invariance_test(m, &config.gibbs_options(g), seed)?),
                None => None,
            };
            let stationary = match &p.stationary {
                Some(s) => Some(stationary_moment_test(
                    m,
                    &config.stationary_options(s),
                    rng::derive_seed(seed, 1),
                )?),
                None => None,
            };
            let oracle = if m.is_quadratic() {
                gaussian_stationary_covariance(m).ok().map(|o| o.summary())
            } else {
                None
            };
            Ok(Outcome::done(
                json!({ "gibbs": gibbs, "stationary": stationary, "oracle": oracle }),
                Vec::new(),
                false,
            ))
        }
        Experiment::LyapunovScan(p) => {
            let m = needs()?;
            let report = drift_scan(m, &config.drift_config(p), seed)?;
            let table = levels_csv(
                "h0,mean,se,ci_low,ci_high,a1,a2,a3,mean_dissipation,blowups,tau,qualifying",
                &report.levels,
                |l| {
                    let e = &l.estimate;
                    format!(
                        "{},{},{},{},{},{},{},{},{},{},{},{}",
                        e.h0,
                        e.mean,
                        e.se,
                        e.ci95.0,
                        e.ci95.1,
                        e.events.a1,
                        e.events.a2,
                        e.events.a3,
                        e.mean_dissipation,
                        e.blowups,
                        l.tau,
                        l.qualifying
                    )
                },
            );
            let inconclusive = report.inconclusive;
            Ok(Outcome::done(report, if csv { vec![("trace_levels.csv".into(), table)] } else { Vec::new() }, inconclusive))
        }
        Experiment::DissipationScan(p) => {
            let m = needs()?;
            let report = dissipation_scan(m, &config.dissipation_config(p), seed)?;
            let table = levels_csv(
                "h0,tau,threshold,successes,ensemble,probability,ci_low,ci_high,bounded,mean_dissipation,blowups",
                &report.levels,
                |l| {
                    format!(
                        "{},{},{},{},{},{},{},{},{},{},{}",
                        l.h0,
                        l.tau,
                        l.threshold,
                        l.successes,
                        l.ensemble,
                        l.probability,
                        l.ci95.0,
                        l.ci95.1,
                        l.bounded,
                        l.mean_dissipation,
                        l.blowups
                    )
                },
            );
            Ok(Outcome::done(report, if csv { vec![("trace_levels.csv".into(), table)] } else { Vec::new() }, false))
        }
        Experiment::DecayFit(p) => {
            let m = needs()?;
            let z0 = p.initial.build(m)?;
            let report = observable_decay_fit(m, &z0, &config.decay_options(p), seed)?;
            let table = report.to_csv();
            let inconclusive = report.inconclusive;
            Ok(Outcome::done(report, if csv { vec![("trace_decay.csv".into(), table)] } else { Vec::new() }, inconclusive))
        }
        Experiment::CounterexampleC4(options) => {
            let run = run_counterexample(options)?;
            let table = run.trace.to_csv();
            Ok(Outcome::done(run, if csv { vec![("trace_c4.csv".into(), table)] } else { Vec::new() }, false))
        }
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn pretty(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json values serialize");
    s.push('\n');
    s
}

/// Writes the outcome into `dir`. `config_bytes` is the raw config file.
pub fn write_outputs(
    dir: &Path,
    config: &ExperimentConfig,
    config_bytes: &[u8],
    outcome: &Outcome,
    timing: &Value,
) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut files: Vec<(String, String)> = Vec::new();
    files.push(("report.json".into(), pretty(&outcome.report)));
    files.extend(outcome.tables.iter().cloned());
    files.sort_by(|a, b| a.0.cmp(&b.0));
    let mut inventory = Vec::new();
    for (name, text) in &files {
        std::fs::write(dir.join(name), text)?;
        inventory.push(json!({ "name": name, "bytes": text.len(), "sha256": sha256_hex(text.as_bytes()) }));
    }
    let manifest = json!({
        "tool": "oscnet",
        "version": env!("CARGO_PKG_VERSION"),
        "command": config.experiment.command(),
        "seed": config.seed,
        "config_sha256": sha256_hex(config_bytes),
        "config": serde_json::to_value(config).expect("configuration serializes"),
        "status": outcome.status,
        "exit_code": outcome.status.exit_code(),
        "partial": outcome.partial,
        "files": inventory,
    });
    std::fs::write(dir.join("manifest.json"), pretty(&manifest))?;
    std::fs::write(dir.join("timing.json"), pretty(timing))
}

#[derive(Debug, Parser)]
#[command(name = "oscnet", version, about = "Oscillator networks driven by Langevin heat baths")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct RunArgs {
    /// Experiment configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory; defaults to `output.dir` or `oscnet-out/<command>`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to $OSCNET_THREADS or the number of cores.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate the configuration and check the structural conditions.
    Check(RunArgs),
    /// Integrate trajectories and record the energy budget.
    Simulate(RunArgs),
    /// Gibbs invariance and stationary moment tests.
    EquilibriumTest(RunArgs),
    /// Exponential drift scan over initial energies.
    LyapunovScan(RunArgs),
    /// Weak-dissipation tail probabilities over initial energies.
    DissipationScan(RunArgs),
    /// Relaxation rate of an observable.
    DecayFit(RunArgs),
    /// Deterministic run of the built-in counterexample.
    #[command(name = "counterexample-c4")]
    CounterexampleC4(RunArgs),
    /// List the built-in topologies and the counterexample model.
    Fixtures,
}

impl Command {
    fn parts(&self) -> Option<(&'static str, &RunArgs)> {
        Some(match self {
            Command::Check(a) => ("check", a),
            Command::Simulate(a) => ("simulate", a),
            Command::EquilibriumTest(a) => ("equilibrium-test", a),
            Command::LyapunovScan(a) => ("lyapunov-scan", a),
            Command::DissipationScan(a) => ("dissipation-scan", a),
            Command::DecayFit(a) => ("decay-fit", a),
            Command::CounterexampleC4(a) => ("counterexample-c4", a),
            Command::Fixtures => return None,
        })
    }
}

pub fn fixtures_listing() -> String {
    let mut out = String::from("name               vertices  edges  baths  controlled  max_depth\n");
    for name in FIXTURE_NAMES {
        let t = builtin_fixture(name).expect("fixtures are valid");
        let r = controls(&t);
        out.push_str(&format!(
            "{:<18} {:>8}  {:>5}  {:>5}  {:<10}  {}\n",
            name,
            t.vertex_count(),
            t.edges().len(),
            t.baths().len(),
            if r.controlled { "yes" } else { "no" },
            r.max_depth().map_or("-".to_string(), |d| d.to_string())
        ));
    }
    out.push_str(
        "\ncounterexample-c4: two masses m1, m2 in R^3, one edge, bath on m1 (gamma = T = 1)\n  \
         V(x,y,z) = y^4/4 + x^2 z^2/2\n  U1 = (x^4 + y^4 + z^4)/4\n  U2 = x^4/64 - y^4/32 + z^4/4\n  \
         q1 = (0, 1, 0), q2 = (4, 2, 0), p = 0\n",
    );
    out
}

/// Parses arguments, runs, writes outputs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { Status::Validation.exit_code() } else { 0 };
        }
    };
    let Some((command, args)) = cli.command.parts() else {
        print!("{}", fixtures_listing());
        return 0;
    };
    let bytes = match std::fs::read(&args.config) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("cannot read {}: {e}", args.config.display());
            return Status::Validation.exit_code();
        }
    };
    let text = String::from_utf8_lossy(&bytes);
    let mut config = match ExperimentConfig::from_json(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("invalid configuration {}:", args.config.display());
            for line in &e.errors {
                eprintln!("  - {line}");
            }
            return Status::Validation.exit_code();
        }
    };
    if command != "check" && config.experiment.command() != command {
        eprintln!(
            "the configuration describes a {} experiment, not {command}",
            config.experiment.command()
        );
        return Status::Validation.exit_code();
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let threads = args
        .threads
        .or_else(|| std::env::var(THREADS_ENV).ok().and_then(|v| v.parse().ok()))
        .unwrap_or(0);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("cannot start worker threads: {e}");
            return Status::Validation.exit_code();
        }
    };
    let dir = args
        .out
        .clone()
        .or_else(|| config.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("oscnet-out").join(command));
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
    let clock = Instant::now();
    let outcome = if command == "check" && config.experiment.command() != "check" {
        let mut checking = config.clone();
        checking.experiment = Experiment::Check(Default::default());
        if checking.model.is_none() {
            Outcome::done(json!({ "valid": true, "experiment": config.experiment.command() }), Vec::new(), false)
        } else {
            pool.install(|| execute(&checking))
        }
    } else {
        pool.install(|| execute(&config))
    };
    let timing = json!({
        "started_unix": started,
        "elapsed_seconds": clock.elapsed().as_secs_f64(),
        "threads": pool.current_num_threads(),
    });
    if let Err(e) = write_outputs(&dir, &config, &bytes, &outcome, &timing) {
        eprintln!("cannot write {}: {e}", dir.display());
        return Status::Validation.exit_code();
    }
    if let Some(err) = outcome.report.get("error").and_then(Value::as_str) {
        eprintln!("{command}: {err}");
    }
    eprintln!("{command}: {:?}, output in {}", outcome.status, dir.display());
    outcome.status.exit_code()
}
