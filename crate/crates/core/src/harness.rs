//! Seeded Monte Carlo sweeps, aggregation and CSV output.
//!
//! Every (cell, trial) pair owns its random streams, derived from the sweep
//! seed, so results do not depend on how trials are scheduled. Within a
//! trial all methods see the same channel realization.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{global_channel, realize, ChannelRealization};
use crate::config::{format_kappa, kappa_list_serde, SystemConfig};
use crate::error::{Error, Result};
use crate::metrics::{evaluate, MetricKind};
use crate::optimizers::{
    baseline_starts, closed_form_mse_tot, closed_form_sum_rate, muiq_with, projected_ascent,
    projected_ascent_baseline, AscentOptions, DirectObjective, OptimizerResult, Warning,
};
use crate::phases::{random_phases, PhaseVector};
use crate::separation::{separate_los_part, SeparatedChannel};

pub const CSV_HEADER: &str = "N,K,kappa_br,method,metric,mean,stderr,trials,failures";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    Random,
    MaxRSum,
    MinMseTot,
    MuiqSum,
    MuiqZf,
    MuiqMmse,
    BaselineSum,
    BaselineZf,
    BaselineMmse,
    BaselineMse,
}

impl Method {
    pub const ALL: [Method; 10] = [
        Method::Random,
        Method::MaxRSum,
        Method::MinMseTot,
        Method::MuiqSum,
        Method::MuiqZf,
        Method::MuiqMmse,
        Method::BaselineSum,
        Method::BaselineZf,
        Method::BaselineMmse,
        Method::BaselineMse,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Random => "Random",
            Method::MaxRSum => "MaxRSum",
            Method::MinMseTot => "MinMseTot",
            Method::MuiqSum => "MuiqSum",
            Method::MuiqZf => "MuiqZf",
            Method::MuiqMmse => "MuiqMmse",
            Method::BaselineSum => "BaselineSum",
            Method::BaselineZf => "BaselineZf",
            Method::BaselineMmse => "BaselineMmse",
            Method::BaselineMse => "BaselineMse",
        }
    }

    /// The metric the method optimizes; `None` for the random benchmark.
    pub fn target(self) -> Option<MetricKind> {
        match self {
            Method::Random => None,
            Method::MaxRSum | Method::MuiqSum | Method::BaselineSum => Some(MetricKind::SumRate),
            Method::MuiqZf | Method::BaselineZf => Some(MetricKind::ZfRate),
            Method::MuiqMmse | Method::BaselineMmse => Some(MetricKind::MmseRate),
            Method::MinMseTot | Method::BaselineMse => Some(MetricKind::MseTot),
        }
    }

    /// Position in [`Method::ALL`]; selects the method's random stream.
    pub fn index(self) -> u64 {
        Method::ALL.iter().position(|m| *m == self).expect("listed") as u64
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown method {s:?}")))
    }
}

/// Parses a comma-separated method list.
pub fn parse_methods(list: &str) -> Result<Vec<Method>> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    /// RIS shapes `(N_y, N_z)`.
    pub n_grid: Vec<(usize, usize)>,
    pub k_list: Vec<usize>,
    #[serde(with = "kappa_list_serde")]
    pub kappa_br_list: Vec<f64>,
    pub methods: Vec<Method>,
    pub trials: usize,
    pub b: u32,
    #[serde(rename = "L")]
    pub l: usize,
    pub seed: u64,
    /// Random starts of the numerical baseline (besides the closed form).
    pub restarts: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            n_grid: vec![(4, 4), (8, 4), (8, 8), (16, 8)],
            k_list: vec![2, 5],
            kappa_br_list: vec![f64::INFINITY, 1.0],
            methods: Method::ALL.to_vec(),
            trials: 200,
            b: 1,
            l: 1,
            seed: 1,
            restarts: 20,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.n_grid.is_empty() || self.k_list.is_empty() || self.kappa_br_list.is_empty() {
            return Err(Error::Config(
                "n_grid, k_list and kappa_br_list must be nonempty".into(),
            ));
        }
        if self.n_grid.iter().any(|&(y, z)| y == 0 || z == 0) {
            return Err(Error::Config("RIS dimensions must be at least 1".into()));
        }
        if self.k_list.contains(&0) {
            return Err(Error::Config("K must be at least 1".into()));
        }
        if self.kappa_br_list.iter().any(|k| k.is_nan() || *k <= 0.0) {
            return Err(Error::Config(
                "kappa_br values must be positive (or inf)".into(),
            ));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("no methods selected".into()));
        }
        if self.b == 0 || self.b > 16 || self.l == 0 {
            return Err(Error::Config("need 1 <= b <= 16 and L >= 1".into()));
        }
        if self.restarts == 0 {
            return Err(Error::Config("restarts must be at least 1".into()));
        }
        Ok(())
    }

    /// System configuration of every sweep cell, in output order.
    pub fn cells(&self, base: &SystemConfig) -> Vec<SystemConfig> {
        let mut out = Vec::new();
        for &(n_y, n_z) in &self.n_grid {
            for &k in &self.k_list {
                for &kappa_br in &self.kappa_br_list {
                    out.push(SystemConfig {
                        n_y,
                        n_z,
                        k,
                        kappa_br,
                        b: self.b,
                        l: self.l,
                        seed: self.seed,
                        ..base.clone()
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TrialFlag {
    /// The design step failed; every metric of this row set is NaN.
    DesignFailed,
    /// This metric could not be evaluated (for example ZF rank deficiency).
    MetricFailed,
    /// The design used the LOS part of a scattered RIS-BS channel.
    ForcedSeparation,
    DegenerateEigenvalue,
    ZeroDirectTerm,
    NoRisContribution,
    NullSpaceDominates,
}

impl From<Warning> for TrialFlag {
    fn from(w: Warning) -> Self {
        match w {
            Warning::DegenerateEigenvalue => TrialFlag::DegenerateEigenvalue,
            Warning::ForcedSeparation => TrialFlag::ForcedSeparation,
            Warning::ZeroDirectTerm => TrialFlag::ZeroDirectTerm,
            Warning::NoRisContribution => TrialFlag::NoRisContribution,
            Warning::NullSpaceDominates => TrialFlag::NullSpaceDominates,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub trial: usize,
    pub n: usize,
    pub k: usize,
    pub kappa_br: f64,
    pub method: Method,
    pub metric: MetricKind,
    /// Metric on the full channel; NaN when a flag marks a failure.
    pub value: f64,
    pub evaluations: usize,
    /// Objective reported by the optimizer for its own target metric.
    pub design_objective: Option<f64>,
    pub flags: Vec<TrialFlag>,
    /// Fingerprint of the channel realization shared by the trial.
    pub realization: u64,
}

impl TrialResult {
    pub fn failed(&self) -> bool {
        !self.value.is_finite()
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Random stream for one purpose (0 = channel, 1 + method index) of one
/// trial of one cell.
pub fn trial_rng(seed: u64, cell: usize, trial: usize, purpose: u64) -> ChaCha8Rng {
    let key = splitmix(splitmix(splitmix(seed) ^ cell as u64) ^ trial as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(purpose);
    rng
}

/// Phases designed by `method` for one realization.
///
/// `sep` is the (possibly forced) separation of `real`. Baselines optimize
/// the separated metric when `H_br` is pure LOS and the full-channel metric
/// otherwise.
pub fn design(
    method: Method,
    real: &ChannelRealization,
    sep: &SeparatedChannel,
    cfg: &SystemConfig,
    restarts: usize,
    rng: &mut ChaCha8Rng,
) -> Result<OptimizerResult> {
    match method {
        Method::Random => Ok(OptimizerResult {
            phases: random_phases(real.n(), rng),
            objective: f64::NAN,
            evaluations: 0,
            trace: None,
            warnings: Vec::new(),
        }),
        Method::MaxRSum => closed_form_sum_rate(sep),
        Method::MinMseTot => closed_form_mse_tot(sep),
        Method::MuiqSum | Method::MuiqZf | Method::MuiqMmse => {
            let kind = method.target().expect("MUIQ has a target");
            muiq_with(kind, sep, cfg.b, cfg.l, cfg.muiq_tie_accept)
        }
        Method::BaselineSum | Method::BaselineZf | Method::BaselineMmse | Method::BaselineMse => {
            let kind = method.target().expect("baseline has a target");
            if real.pure_los {
                projected_ascent_baseline(kind, sep, restarts, rng)
            } else {
                let starts = baseline_starts(kind, sep, restarts, rng)?;
                let obj = DirectObjective {
                    kind,
                    real,
                    sigma2: cfg.sigma2(),
                };
                let mut r = projected_ascent(&obj, &starts, &AscentOptions::default())?;
                r.warnings.push(Warning::ForcedSeparation);
                Ok(r)
            }
        }
    }
}

/// Runs every method on one trial of one cell.
pub fn run_trial(
    cfg: &SystemConfig,
    spec: &SweepSpec,
    cell: usize,
    trial: usize,
) -> Result<Vec<TrialResult>> {
    let mut channel_rng = trial_rng(spec.seed, cell, trial, 0);
    let real = realize(cfg, &mut channel_rng)?;
    let sigma2 = cfg.sigma2();
    let realization = real.fingerprint();
    let sep = separate_los_part(&real, sigma2);

    let mut rows = Vec::with_capacity(spec.methods.len() * 4);
    for &method in &spec.methods {
        let mut rng = trial_rng(spec.seed, cell, trial, 1 + method.index());
        let designed = sep
            .as_ref()
            .map_err(Clone::clone)
            .and_then(|s| design(method, &real, s, cfg, spec.restarts, &mut rng));
        let (phases, evaluations, design_objective, mut flags): (
            Option<PhaseVector>,
            usize,
            Option<f64>,
            Vec<TrialFlag>,
        ) = match designed {
            Ok(r) => {
                let mut flags: Vec<TrialFlag> = r.warnings.iter().map(|&w| w.into()).collect();
                flags.dedup();
                let obj = method.target().map(|_| r.objective);
                (Some(r.phases), r.evaluations, obj, flags)
            }
            Err(_) => (None, 0, None, vec![TrialFlag::DesignFailed]),
        };
        if !real.pure_los
            && method != Method::Random
            && !flags.contains(&TrialFlag::ForcedSeparation)
        {
            flags.push(TrialFlag::ForcedSeparation);
        }
        let h = phases.as_ref().map(|p| global_channel(&real, p));
        for kind in MetricKind::ALL {
            let mut row_flags = flags.clone();
            let value = match &h {
                Some(Ok(h)) => match evaluate(kind, h, sigma2) {
                    Ok(v) if v.is_finite() => v,
                    _ => {
                        row_flags.push(TrialFlag::MetricFailed);
                        f64::NAN
                    }
                },
                _ => {
                    if !row_flags.contains(&TrialFlag::DesignFailed) {
                        row_flags.push(TrialFlag::DesignFailed);
                    }
                    f64::NAN
                }
            };
            rows.push(TrialResult {
                trial,
                n: cfg.n(),
                k: cfg.k,
                kappa_br: cfg.kappa_br,
                method,
                metric: kind,
                value,
                evaluations,
                design_objective: if method.target() == Some(kind) {
                    design_objective
                } else {
                    None
                },
                flags: row_flags,
                realization,
            });
        }
    }
    Ok(rows)
}

/// Runs the whole sweep; rows come out grouped by cell, then trial, then
/// method, then metric.
pub fn run_sweep(cfg: &SystemConfig, spec: &SweepSpec) -> Result<Vec<TrialResult>> {
    spec.validate()?;
    cfg.validate()?;
    let cells = spec.cells(cfg);
    for c in &cells {
        c.validate()?;
    }
    let units: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..spec.trials).map(move |t| (c, t)))
        .collect();
    let chunks: Vec<Result<Vec<TrialResult>>> = units
        .par_iter()
        .map(|&(c, t)| run_trial(&cells[c], spec, c, t))
        .collect();
    let mut out = Vec::with_capacity(units.len() * spec.methods.len() * 4);
    for chunk in chunks {
        out.extend(chunk?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub n: usize,
    pub k: usize,
    pub kappa_br: f64,
    pub method: Method,
    pub metric: MetricKind,
    pub mean: f64,
    /// Sample standard deviation over `sqrt(trials)`; 0 for one trial.
    pub stderr: f64,
    /// Successful trials.
    pub trials: usize,
    pub failures: usize,
}

/// Mean and standard error of a sample (`n - 1` normalization).
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    (mean, (var / nf).sqrt())
}

/// Per (N, K, kappa_br, method, metric) summary in first-appearance order.
pub fn aggregate(results: &[TrialResult]) -> Vec<SummaryRow> {
    type Key = (usize, usize, u64, Method, MetricKind);
    let mut order: Vec<Key> = Vec::new();
    let mut groups: HashMap<Key, (Vec<f64>, usize)> = HashMap::new();
    for r in results {
        let key = (r.n, r.k, r.kappa_br.to_bits(), r.method, r.metric);
        let entry = groups.entry(key).or_insert_with(|| {
            order.push(key);
            (Vec::new(), 0)
        });
        if r.failed() {
            entry.1 += 1;
        } else {
            entry.0.push(r.value);
        }
    }
    order
        .into_iter()
        .map(|key| {
            let (values, failures) = &groups[&key];
            let (mean, stderr) = mean_stderr(values);
            SummaryRow {
                n: key.0,
                k: key.1,
                kappa_br: f64::from_bits(key.2),
                method: key.3,
                metric: key.4,
                mean,
                stderr,
                trials: values.len(),
                failures: *failures,
            }
        })
        .collect()
}

/// `printf("%.12g")` formatting.
pub fn format_g12(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_csv<W: Write>(rows: &[SummaryRow], mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.n,
            r.k,
            format_kappa(r.kappa_br),
            r.method,
            r.metric,
            format_g12(r.mean),
            format_g12(r.stderr),
            r.trials,
            r.failures
        )?;
    }
    Ok(())
}
