//! Self-check suite behind `ris-sim validate`.
//!
//! Each check runs a handful of seeded instances and compares the library
//! against a slower direct computation.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{global_channel, realize};
use crate::config::SystemConfig;
use crate::error::Result;
use crate::harness::{run_trial, SweepSpec};
use crate::metrics::{evaluate, MetricKind};
use crate::numerics::{
    hermitian_inverse, hermitian_max_eigenpair, reduced_max_eigvec, smw_inverse, CMatrix,
};
use crate::optimizers::{brute_force_discrete, closed_form_sum_rate, muiq};
use crate::phases::random_phases;
use crate::separation::{separate, SeparatedChannel};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn instance(
    cfg: &SystemConfig,
    seed: u64,
) -> Result<(crate::channel::ChannelRealization, SeparatedChannel)> {
    let real = realize(cfg, &mut ChaCha8Rng::seed_from_u64(seed))?;
    let sep = separate(&real, cfg.sigma2())?;
    Ok((real, sep))
}

fn small(n_y: usize, n_z: usize, k: usize) -> SystemConfig {
    SystemConfig {
        m_y: 4,
        m_z: 4,
        n_y,
        n_z,
        k,
        ..SystemConfig::default()
    }
}

fn separation_exactness() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for (seed, k) in (0..20).zip([2, 5].into_iter().cycle()) {
        let cfg = small(4, 4, k);
        let (real, sep) = instance(&cfg, seed)?;
        let phases = random_phases(cfg.n(), &mut ChaCha8Rng::seed_from_u64(seed + 1000));
        let h = global_channel(&real, &phases)?;
        for kind in MetricKind::ALL {
            let direct = evaluate(kind, &h, cfg.sigma2())?;
            let separated = sep.metric(kind, &phases)?;
            worst = worst.max((direct - separated).abs() / direct.abs());
        }
    }
    Ok((worst <= 1e-8, format!("max relative error {worst:.3e}")))
}

fn reduction() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for seed in 0..10 {
        let cfg = small(4, 4, 2 + (seed as usize % 4));
        let (_, sep) = instance(&cfg, seed)?;
        let p = sep.p_sum();
        let nu = sep.w1.dotc(&(p * &sep.w1)).re / sep.n() as f64;
        let red = reduced_max_eigvec(nu, p, &sep.a1)?;
        let n = sep.n();
        let full = CMatrix::identity(n, n).scale(nu) + &sep.a1 * p * sep.a1.adjoint();
        let full = (&full + full.adjoint()).scale(0.5);
        let top = hermitian_max_eigenpair(&full)?;
        worst = worst.max((red.lambda - top.value).abs() / top.value.abs());
    }
    Ok((
        worst <= 1e-9,
        format!("max eigenvalue relative error {worst:.3e}"),
    ))
}

fn muiq_contract() -> Result<(bool, String)> {
    let mut ok = true;
    let mut ratio_sum = 0.0;
    let mut count = 0;
    for seed in 0..10 {
        let cfg = small(2, 2, 2);
        let (_, sep) = instance(&cfg, seed)?;
        for bits in [1, 2] {
            let r = muiq(MetricKind::SumRate, &sep, bits, 1)?;
            let bf = brute_force_discrete(MetricKind::SumRate, &sep, bits)?;
            let trace = r.trace.as_deref().unwrap_or(&[]);
            ok &= trace.windows(2).all(|p| p[1] >= p[0]);
            ok &= r.evaluations == 4 << bits;
            ok &= r.objective <= bf.objective;
            ok &= trace.first().is_some_and(|&t0| r.objective >= t0);
            ratio_sum += r.objective / bf.objective;
            count += 1;
        }
    }
    let ratio = ratio_sum / count as f64;
    Ok((
        ok && ratio >= 0.95,
        format!("mean MUIQ / brute-force ratio {ratio:.4}"),
    ))
}

fn rank_one_update() -> Result<(bool, String)> {
    let cfg = small(4, 4, 3);
    let mut worst = 0.0f64;
    for seed in 0..10 {
        let (_, sep) = instance(&cfg, seed)?;
        let phases = random_phases(cfg.n(), &mut ChaCha8Rng::seed_from_u64(seed));
        let w = sep.w(&phases)?;
        let fast = smw_inverse(sep.p_sum(), &w)?;
        let slow = hermitian_inverse(&(&sep.q_sum + &w * w.adjoint()))?;
        worst = worst.max((&fast - &slow).norm() / slow.norm());
    }
    Ok((worst <= 1e-9, format!("max relative error {worst:.3e}")))
}

fn closed_form_beats_random() -> Result<(bool, String)> {
    let cfg = small(8, 4, 2);
    let mut wins = 0;
    for seed in 0..10 {
        let (_, sep) = instance(&cfg, seed)?;
        let cf = closed_form_sum_rate(&sep)?.objective;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mean: f64 = (0..50)
            .map(|_| sep.metric(MetricKind::SumRate, &random_phases(cfg.n(), &mut rng)))
            .sum::<Result<f64>>()?
            / 50.0;
        if cf > mean {
            wins += 1;
        }
    }
    Ok((
        wins == 10,
        format!("{wins}/10 instances above the random mean"),
    ))
}

fn determinism() -> Result<(bool, String)> {
    let cfg = small(2, 4, 2);
    let spec = SweepSpec {
        restarts: 2,
        ..SweepSpec::default()
    };
    let a = run_trial(&cfg, &spec, 0, 3)?;
    let b = run_trial(&cfg, &spec, 0, 3)?;
    let same = a.len() == b.len()
        && a.iter()
            .zip(&b)
            .all(|(x, y)| x.value.to_bits() == y.value.to_bits());
    let paired = a.iter().all(|r| r.realization == a[0].realization);
    Ok((same && paired, format!("{} rows compared", a.len())))
}

fn unit_modulus() -> Result<(bool, String)> {
    let cfg = small(4, 4, 2);
    let (_, sep) = instance(&cfg, 5)?;
    let r = closed_form_sum_rate(&sep)?;
    let worst = r
        .phases
        .coefficients()
        .iter()
        .map(|z: &Complex64| (z.norm() - 1.0).abs())
        .fold(0.0, f64::max);
    Ok((worst < 1e-12, format!("max modulus defect {worst:.3e}")))
}

type CheckFn = fn() -> Result<(bool, String)>;

/// Runs every check; errors inside a check count as failures.
pub fn run_checks() -> Vec<Check> {
    let checks: [(&str, CheckFn); 7] = [
        (
            "separated metrics equal direct metrics",
            separation_exactness,
        ),
        ("reduced eigenproblem matches full eigenproblem", reduction),
        (
            "MUIQ monotone, counted and below brute force",
            muiq_contract,
        ),
        ("rank-one inverse update", rank_one_update),
        (
            "closed-form sum rate beats random phases",
            closed_form_beats_random,
        ),
        ("trials are deterministic and paired", determinism),
        ("designed coefficients are unit modulus", unit_modulus),
    ];
    checks
        .into_iter()
        .map(|(name, f)| match f() {
            Ok((passed, detail)) => Check {
                name,
                passed,
                detail,
            },
            Err(e) => Check {
                name,
                passed: false,
                detail: format!("error: {e}"),
            },
        })
        .collect()
}
