use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::{json, Value};

use ris_core::channel::{global_channel, realize};
use ris_core::config::{format_kappa, load_config};
use ris_core::harness::{aggregate, design, parse_methods, run_sweep, trial_rng, write_csv};
use ris_core::metrics::{evaluate, MetricKind};
use ris_core::numerics::{CMatrix, CVector};
use ris_core::separation::separate_los_part;
use ris_core::validate::run_checks;
use ris_core::{Error, Result, SweepSpec, SystemConfig};

#[derive(Parser)]
#[command(
    name = "ris-sim",
    version,
    about = "RIS-assisted multi-user uplink simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo sweep and write the summary CSV.
    Run {
        #[command(flatten)]
        common: Common,
        /// Output CSV path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the built-in oracle checks and print one line per check.
    Validate,
    /// Run one trial of the first sweep cell and dump it as JSON.
    Single {
        #[command(flatten)]
        common: Common,
        /// Trial index inside the cell.
        #[arg(long, default_value_t = 0)]
        trial: usize,
        /// Output JSON path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// TOML file with system and sweep parameters.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated method list, e.g. Random,MaxRSum,MuiqSum.
    #[arg(long)]
    methods: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
}

impl Common {
    fn resolve(&self) -> Result<(SystemConfig, SweepSpec)> {
        let (mut cfg, mut spec) = match &self.config {
            Some(path) => load_config(path)?,
            None => (SystemConfig::default(), SweepSpec::default()),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
            spec.seed = seed;
        }
        if let Some(list) = &self.methods {
            spec.methods = parse_methods(list)?;
        }
        if let Some(trials) = self.trials {
            spec.trials = trials;
        }
        spec.validate()?;
        Ok((cfg, spec))
    }
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_run(common: &Common, out: &Option<PathBuf>) -> Result<()> {
    let (cfg, spec) = common.resolve()?;
    let results = run_sweep(&cfg, &spec)?;
    let summary = aggregate(&results);
    let mut w = open_out(out)?;
    write_csv(&summary, &mut w)?;
    w.flush()?;
    let failures: usize = summary.iter().map(|r| r.failures).sum();
    eprintln!(
        "{} trial rows, {} summary rows, {failures} failed evaluations",
        results.len(),
        summary.len()
    );
    Ok(())
}

fn complex_json(z: &Complex64) -> Value {
    json!([z.re, z.im])
}

fn vector_json(v: &CVector) -> Value {
    Value::Array(v.iter().map(complex_json).collect())
}

fn matrix_json(m: &CMatrix) -> Value {
    Value::Array(
        m.row_iter()
            .map(|r| Value::Array(r.iter().map(complex_json).collect()))
            .collect(),
    )
}

fn cmd_single(common: &Common, trial: usize, out: &Option<PathBuf>) -> Result<()> {
    let (base, spec) = common.resolve()?;
    let cfg = spec
        .cells(&base)
        .into_iter()
        .next()
        .expect("validated nonempty grid");
    let real = realize(&cfg, &mut trial_rng(spec.seed, 0, trial, 0))?;
    let sep = separate_los_part(&real, cfg.sigma2())?;
    let mut methods = Vec::new();
    for &method in &spec.methods {
        let mut rng = trial_rng(spec.seed, 0, trial, 1 + method.index());
        let entry = match design(method, &real, &sep, &cfg, spec.restarts, &mut rng) {
            Ok(r) => {
                let h = global_channel(&real, &r.phases)?;
                let metrics: serde_json::Map<String, Value> = MetricKind::ALL
                    .iter()
                    .map(|&k| {
                        let v = evaluate(k, &h, cfg.sigma2()).map_or(Value::Null, |v| json!(v));
                        (k.name().to_string(), v)
                    })
                    .collect();
                json!({
                    "method": method.name(),
                    "phases": r.phases.phases(),
                    "w": vector_json(&sep.w(&r.phases)?),
                    "objective": if r.objective.is_finite() { json!(r.objective) } else { Value::Null },
                    "evaluations": r.evaluations,
                    "warnings": r.warnings.iter().map(|w| format!("{w:?}")).collect::<Vec<_>>(),
                    "metrics": metrics,
                })
            }
            Err(e) => json!({ "method": method.name(), "error": e.to_string() }),
        };
        methods.push(entry);
    }
    let doc = json!({
        "N": cfg.n(),
        "M": cfg.m(),
        "K": cfg.k,
        "kappa_br": format_kappa(cfg.kappa_br),
        "seed": spec.seed,
        "trial": trial,
        "sigma2": cfg.sigma2(),
        "pure_los": real.pure_los,
        "forced_separation": sep.forced,
        "w1": vector_json(&sep.w1),
        "Q_sum": matrix_json(&sep.q_sum),
        "Q_zf": matrix_json(&sep.q_zf),
        "methods": methods,
    });
    let mut w = open_out(out)?;
    serde_json::to_writer_pretty(&mut w, &doc).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn cmd_validate() -> bool {
    let checks = run_checks();
    for c in &checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        println!("{tag}  {}  ({})", c.name, c.detail);
    }
    let passed = checks.iter().filter(|c| c.passed).count();
    println!("{passed}/{} checks passed", checks.len());
    passed == checks.len()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run { common, out } => cmd_run(common, out),
        Command::Single { common, trial, out } => cmd_single(common, *trial, out),
        Command::Validate => {
            return if cmd_validate() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            };
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
