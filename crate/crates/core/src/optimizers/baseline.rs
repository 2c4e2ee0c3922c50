use num_complex::Complex64;
use rand::Rng;

use super::{closed_form_mse_tot, closed_form_sum_rate, OptimizerResult, Warning};
use crate::channel::{cascade, ChannelRealization};
use crate::error::{Error, Result};
use crate::metrics::{evaluate, MetricKind};
use crate::numerics::{CMatrix, CVector};
use crate::phases::{random_phases, PhaseVector};
use crate::separation::SeparatedChannel;

/// A scalar metric of the RIS phases.
pub trait PhaseObjective {
    fn kind(&self) -> MetricKind;
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn value(&self, phases: &[f64]) -> Result<f64>;

    /// Central differences `(f(phi + h e_n) - f(phi - h e_n)) / 2h` for every
    /// `n`; `Err` entries mark coordinates where the metric failed.
    fn fd_gradient(&self, phases: &[f64], step: f64) -> Vec<Result<f64>> {
        let mut probe = phases.to_vec();
        (0..phases.len())
            .map(|n| {
                probe[n] = phases[n] + step;
                let up = self.value(&probe);
                probe[n] = phases[n] - step;
                let down = self.value(&probe);
                probe[n] = phases[n];
                Ok((up? - down?) / (2.0 * step))
            })
            .collect()
    }
}

/// The separated metric; valid on pure-LOS channels (or as a design model).
pub struct SeparatedObjective<'a> {
    pub kind: MetricKind,
    pub sep: &'a SeparatedChannel,
}

impl PhaseObjective for SeparatedObjective<'_> {
    fn kind(&self) -> MetricKind {
        self.kind
    }

    fn len(&self) -> usize {
        self.sep.n()
    }

    fn value(&self, phases: &[f64]) -> Result<f64> {
        let coeffs = CVector::from_iterator(
            phases.len(),
            phases.iter().map(|&p| Complex64::from_polar(1.0, p)),
        );
        let w = self.sep.w_from_coefficients(&coeffs)?;
        self.sep.metric_at_w(self.kind, &w)
    }

    fn fd_gradient(&self, phases: &[f64], step: f64) -> Vec<Result<f64>> {
        let sep = self.sep;
        let coeffs = CVector::from_iterator(
            phases.len(),
            phases.iter().map(|&p| Complex64::from_polar(1.0, p)),
        );
        let w = match sep.w_from_coefficients(&coeffs) {
            Ok(w) => w,
            Err(e) => return vec![Err(e); phases.len()],
        };
        let one = Complex64::new(1.0, 0.0);
        (0..phases.len())
            .map(|n| {
                let x_old = Complex64::from_polar(1.0, -phases[n]);
                let eval = |h: f64| {
                    let mut probe = w.clone();
                    let x_new = Complex64::from_polar(1.0, -(phases[n] + h));
                    probe.axpy(x_new - x_old, sep.col(n), one);
                    sep.metric_at_w(self.kind, &probe)
                };
                let up = eval(step)?;
                let down = eval(-step)?;
                Ok((up - down) / (2.0 * step))
            })
            .collect()
    }
}

/// The metric on the full channel `H_d + H_br diag(c) H_ru`, for any `H_br`.
pub struct DirectObjective<'a> {
    pub kind: MetricKind,
    pub real: &'a ChannelRealization,
    pub sigma2: f64,
}

impl DirectObjective<'_> {
    fn channel(&self, phases: &[f64]) -> Result<CMatrix> {
        let coeffs = CVector::from_iterator(
            phases.len(),
            phases.iter().map(|&p| Complex64::from_polar(1.0, p)),
        );
        cascade(&self.real.h_d, &self.real.h_br, &coeffs, &self.real.h_ru)
    }
}

impl PhaseObjective for DirectObjective<'_> {
    fn kind(&self) -> MetricKind {
        self.kind
    }

    fn len(&self) -> usize {
        self.real.n()
    }

    fn value(&self, phases: &[f64]) -> Result<f64> {
        evaluate(self.kind, &self.channel(phases)?, self.sigma2)
    }

    fn fd_gradient(&self, phases: &[f64], step: f64) -> Vec<Result<f64>> {
        let h = match self.channel(phases) {
            Ok(h) => h,
            Err(e) => return vec![Err(e); phases.len()],
        };
        let real = self.real;
        (0..phases.len())
            .map(|n| {
                let c_old = Complex64::from_polar(1.0, phases[n]);
                let col = real.h_br.column(n);
                let row = real.h_ru.row(n);
                let eval = |d: f64| {
                    let delta = Complex64::from_polar(1.0, phases[n] + d) - c_old;
                    let probe = &h + (col * row) * delta;
                    evaluate(self.kind, &probe, self.sigma2)
                };
                let up = eval(step)?;
                let down = eval(-step)?;
                Ok((up - down) / (2.0 * step))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AscentOptions {
    /// Central-difference step in radians.
    pub fd_step: f64,
    /// Stop once one iteration changes the objective by less than this.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Armijo sufficient-increase constant.
    pub armijo: f64,
    pub max_backtracks: usize,
}

impl Default for AscentOptions {
    fn default() -> Self {
        AscentOptions {
            fd_step: 1e-6,
            tolerance: 1e-10,
            max_iterations: 500,
            armijo: 1e-4,
            max_backtracks: 40,
        }
    }
}

struct Run {
    phases: Vec<f64>,
    value: f64,
    evaluations: usize,
}

/// Finite-difference ascent (descent for `MseTot`) with backtracking from
/// one starting point.
fn ascend<O: PhaseObjective + ?Sized>(obj: &O, start: &[f64], opts: &AscentOptions) -> Result<Run> {
    let sign = if obj.kind().maximize() { 1.0 } else { -1.0 };
    let mut phases = start.to_vec();
    let mut value = obj.value(&phases)?;
    let mut evaluations = 1;
    // largest per-coordinate move of the first trial step, in radians
    let mut step_scale = 0.5;

    for _ in 0..opts.max_iterations {
        let grad = obj.fd_gradient(&phases, opts.fd_step);
        evaluations += 2 * phases.len();
        // coordinates where the metric fails are frozen for this iteration
        let g: Vec<f64> = grad
            .into_iter()
            .map(|r| r.map(|v| sign * v).unwrap_or(0.0))
            .collect();
        let gmax = g.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if gmax == 0.0 || !gmax.is_finite() {
            break;
        }
        let gnorm2: f64 = g.iter().map(|v| v * v).sum();
        let mut t = step_scale / gmax;
        let mut accepted = None;
        for _ in 0..opts.max_backtracks {
            let trial: Vec<f64> = phases.iter().zip(&g).map(|(p, d)| p + t * d).collect();
            evaluations += 1;
            if let Ok(v) = obj.value(&trial) {
                if sign * (v - value) >= opts.armijo * t * gnorm2 {
                    accepted = Some((trial, v));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((trial, v)) = accepted else {
            break;
        };
        let change = (v - value).abs();
        phases = trial;
        value = v;
        step_scale = (2.0 * t * gmax).min(std::f64::consts::PI);
        if change < opts.tolerance {
            break;
        }
    }
    Ok(Run {
        phases,
        value,
        evaluations,
    })
}

/// Runs the ascent from every start and keeps the best end point.
///
/// Starts whose initial evaluation fails are skipped; if all fail the first
/// error is returned.
pub fn projected_ascent<O: PhaseObjective + ?Sized>(
    obj: &O,
    starts: &[PhaseVector],
    opts: &AscentOptions,
) -> Result<OptimizerResult> {
    let kind = obj.kind();
    let mut best: Option<Run> = None;
    let mut first_error = None;
    let mut evaluations = 0;
    for start in starts {
        if start.len() != obj.len() {
            return Err(Error::validation("start point has the wrong length"));
        }
        match ascend(obj, start.phases(), opts) {
            Ok(run) => {
                evaluations += run.evaluations;
                let better = match &best {
                    None => true,
                    Some(b) => kind.better(run.value, b.value),
                };
                if better {
                    best = Some(run);
                }
            }
            Err(e) => {
                evaluations += 1;
                first_error.get_or_insert(e);
            }
        }
    }
    let best = match (best, first_error) {
        (Some(b), _) => b,
        (None, Some(e)) => return Err(e),
        (None, None) => return Err(Error::validation("no start points given")),
    };
    let phases = PhaseVector::continuous(best.phases);
    // re-evaluate on the wrapped phases so `objective` matches `phases`
    let objective = obj.value(phases.phases())?;
    Ok(OptimizerResult {
        phases,
        objective,
        evaluations: evaluations + 1,
        trace: None,
        warnings: Vec::new(),
    })
}

/// Start points of the numerical baseline: the closed-form design matching
/// `kind` followed by `restarts` uniformly random phase vectors.
pub fn baseline_starts<R: Rng + ?Sized>(
    kind: MetricKind,
    sep: &SeparatedChannel,
    restarts: usize,
    rng: &mut R,
) -> Result<Vec<PhaseVector>> {
    let design = match kind {
        MetricKind::SumRate => closed_form_sum_rate(sep),
        _ => closed_form_mse_tot(sep),
    };
    let mut starts = Vec::with_capacity(restarts + 1);
    // a failed closed form (for example a numerical breakdown) only costs one start
    if let Ok(d) = design {
        starts.push(d.phases);
    }
    starts.extend((0..restarts).map(|_| random_phases(sep.n(), rng)));
    Ok(starts)
}

/// Multi-restart numerical baseline on the separated metric.
pub fn projected_ascent_baseline<R: Rng + ?Sized>(
    kind: MetricKind,
    sep: &SeparatedChannel,
    restarts: usize,
    rng: &mut R,
) -> Result<OptimizerResult> {
    if restarts == 0 {
        return Err(Error::validation("the baseline needs at least one restart"));
    }
    let starts = baseline_starts(kind, sep, restarts, rng)?;
    let mut result = projected_ascent(
        &SeparatedObjective { kind, sep },
        &starts,
        &AscentOptions::default(),
    )?;
    if sep.forced {
        result.warnings.push(Warning::ForcedSeparation);
    }
    Ok(result)
}
