mod common;

use std::f64::consts::TAU;

use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ris_core::channel::{global_channel, realize};
use ris_core::metrics::{evaluate, MetricKind};
use ris_core::optimizers::{
    brute_force_discrete, closed_form_mse_tot, closed_form_sum_rate, mse_tot_eigvec, muiq,
    muiq_with, project_unit_modulus, projected_ascent, projected_ascent_baseline, sum_rate_eigvec,
    AscentOptions, SeparatedObjective, Warning,
};
use ris_core::phases::random_phases;
use ris_core::separation::{separate, separate_parts, SeparatedChannel};
use ris_core::{Error, PhaseRepr, PhaseVector, SystemConfig};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn cfg(n_y: usize, n_z: usize, k: usize) -> SystemConfig {
    SystemConfig {
        m_y: 4,
        m_z: 4,
        n_y,
        n_z,
        k,
        ..SystemConfig::default()
    }
}

fn instance(n_y: usize, n_z: usize, k: usize, seed: u64) -> SeparatedChannel {
    let c0 = cfg(n_y, n_z, k);
    let real = realize(&c0, &mut rng(seed)).unwrap();
    separate(&real, c0.sigma2()).unwrap()
}

/// Single user, no direct link: only `|w|` matters.
fn no_direct_single_user(n: usize, seed: u64) -> SeparatedChannel {
    let mut r = rng(seed);
    let a_b = CVec::from_element(2, c(1.0, 0.0));
    let a_r = CVec::from_fn(n, |_, _| c(0.0, r.random_range(0.0..TAU)).exp());
    let h_ru = random_matrix(n, 1, &mut r);
    separate_parts(&CMat::zeros(2, 1), &h_ru, &a_b, &a_r, 0.5, 0.3, false).unwrap()
}

fn monotone(kind: MetricKind, trace: &[f64]) -> bool {
    trace.windows(2).all(|p| {
        if kind.maximize() {
            p[1] >= p[0]
        } else {
            p[1] <= p[0]
        }
    })
}

#[test]
fn muiq_two_elements_reaches_grid_optimum() {
    // With w1 = 0 a common sign flip leaves |w| unchanged, so fixing element
    // 0 at its start value loses nothing and one coordinate pass is exhaustive.
    for seed in 0..20 {
        let sep = no_direct_single_user(2, seed);
        for kind in [
            MetricKind::SumRate,
            MetricKind::MmseRate,
            MetricKind::MseTot,
        ] {
            let m = muiq(kind, &sep, 1, 1).unwrap();
            let mut best = if kind.maximize() {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            };
            for i0 in 0..2 {
                for i1 in 0..2 {
                    let x = PhaseVector::discrete(1, vec![i0, i1], &sep.a_r).unwrap();
                    let v = sep.metric(kind, &x).unwrap();
                    if kind.better(v, best) {
                        best = v;
                    }
                }
            }
            assert!((m.objective - best).abs() <= 1e-12 * best.abs(), "{kind}");
        }
    }
}

#[test]
fn muiq_without_ris_keeps_start() {
    let c0 = cfg(4, 2, 2);
    let real = realize(&c0, &mut rng(1)).unwrap();
    let sep = separate_parts(
        &real.h_d,
        &CMat::zeros(8, 2),
        &real.a_b,
        &real.a_r,
        real.beta_br,
        c0.sigma2(),
        false,
    )
    .unwrap();
    for kind in MetricKind::ALL {
        let start = sep
            .metric(
                kind,
                &PhaseVector::discrete(2, vec![0; 8], &sep.a_r).unwrap(),
            )
            .unwrap();
        let r = muiq(kind, &sep, 2, 1).unwrap();
        assert_eq!(r.objective, start);
        assert_eq!(
            r.phases.repr(),
            &PhaseRepr::Discrete {
                bits: 2,
                indices: vec![0; 8]
            }
        );
        assert_eq!(r.trace.as_deref(), Some(&[start][..]));
        // the literal ">=" rule walks every tie to the last grid index
        let t = muiq_with(kind, &sep, 2, 1, true).unwrap();
        assert_eq!(
            t.phases.repr(),
            &PhaseRepr::Discrete {
                bits: 2,
                indices: vec![3; 8]
            }
        );
    }
}

#[test]
fn muiq_trace_and_count() {
    let sep = instance(4, 4, 2, 2);
    for kind in MetricKind::ALL {
        for (bits, repeats) in [(3, 1), (1, 2), (2, 3)] {
            let r = muiq(kind, &sep, bits, repeats).unwrap();
            assert_eq!(r.evaluations, repeats * 16 * (1 << bits));
            let trace = r.trace.as_ref().unwrap();
            assert!(monotone(kind, trace), "{kind} trace not monotone");
            let last = *trace.last().unwrap();
            assert!((last - r.objective).abs() <= 1e-12 * last.abs());
            let recomputed = sep.metric(kind, &r.phases).unwrap();
            assert!((recomputed - r.objective).abs() <= 1e-9 * r.objective.abs());
            match r.phases.repr() {
                PhaseRepr::Discrete { bits: b, indices } => {
                    assert_eq!(*b, bits);
                    assert!(indices.iter().all(|&m| m < 1 << bits));
                }
                PhaseRepr::Continuous => panic!("MUIQ must return grid phases"),
            }
        }
    }
}

#[test]
fn brute_force_trivial_and_guard() {
    let sep = no_direct_single_user(1, 3);
    let r = brute_force_discrete(MetricKind::SumRate, &sep, 1).unwrap();
    assert_eq!(r.evaluations, 2);
    let v0 = sep
        .metric(
            MetricKind::SumRate,
            &PhaseVector::discrete(1, vec![0], &sep.a_r).unwrap(),
        )
        .unwrap();
    let v1 = sep
        .metric(
            MetricKind::SumRate,
            &PhaseVector::discrete(1, vec![1], &sep.a_r).unwrap(),
        )
        .unwrap();
    assert_eq!(r.objective, v0.max(v1));

    let big = instance(7, 3, 1, 4);
    assert!(matches!(
        brute_force_discrete(MetricKind::SumRate, &big, 1),
        Err(Error::Validation(_))
    ));
}

#[test]
fn brute_force_dominates_muiq() {
    for seed in 0..10 {
        let sep = instance(2, 2, 2, 10 + seed);
        for bits in [1, 2] {
            for kind in MetricKind::ALL {
                let bf = brute_force_discrete(kind, &sep, bits).unwrap();
                let m = muiq(kind, &sep, bits, 1).unwrap();
                assert!(!kind.better(m.objective, bf.objective), "{kind} b={bits}");
            }
        }
    }
}

#[test]
fn brute_force_matches_direct_enumeration() {
    let c0 = cfg(2, 2, 2);
    for seed in 0..3 {
        let real = realize(&c0, &mut rng(20 + seed)).unwrap();
        let sep = separate(&real, c0.sigma2()).unwrap();
        for kind in MetricKind::ALL {
            let bf = brute_force_discrete(kind, &sep, 2).unwrap();
            // enumerate physical coefficients a_r[n] * j^m on the full channel
            let mut best = if kind.maximize() {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            };
            for code in 0..256u32 {
                let phases = PhaseVector::continuous((0..4).map(|n| {
                    let m = (code >> (2 * (3 - n))) & 3;
                    real.a_r[n as usize].arg() + TAU * m as f64 / 4.0
                }));
                let v =
                    evaluate(kind, &global_channel(&real, &phases).unwrap(), c0.sigma2()).unwrap();
                if kind.better(v, best) {
                    best = v;
                }
            }
            assert!((bf.objective - best).abs() <= 1e-9 * best.abs(), "{kind}");
        }
    }
}

#[test]
fn matched_phasing_single_user() {
    for seed in 0..5 {
        let sep = no_direct_single_user(6, seed);
        let r = closed_form_sum_rate(&sep).unwrap();
        let gain: f64 = sep.a1.iter().map(|z| z.norm()).sum();
        let want = (1.0 + gain * gain / sep.sigma2).log2();
        assert!((r.objective - want).abs() <= 1e-12 * want);
        // co-phased: every term of w has the same angle
        let terms: Vec<_> = (0..6)
            .map(|n| sep.a1[(n, 0)].conj() * c(0.0, -r.phases.phases()[n]).exp())
            .collect();
        assert!(terms
            .iter()
            .all(|t| (t.arg() - terms[0].arg()).sin().abs() < 1e-9));
    }
}

#[test]
fn sum_rate_reduction_agrees_with_full_problem() {
    for (k, seed) in [(1, 1), (2, 2), (2, 3), (3, 4), (2, 5)] {
        let sep = instance(4, 2, k, 30 + seed);
        let p = gauss_inverse(&sep.q_sum);
        let n = sep.n();
        let nu = inner(&sep.w1, &mul_vec(&p, &sep.w1)).re / n as f64;
        let mut z = mul(&mul(&sep.a1, &p), &adjoint(&sep.a1));
        for i in 0..n {
            z[(i, i)] += c(nu, 0.0);
        }
        let (spec, v) = hermitian_oracle(&z);
        let red = sum_rate_eigvec(&sep).unwrap();
        assert!((rayleigh(&z, &red.x_star) - spec[0]).abs() <= 1e-7 * spec[0]);
        assert!((red.lambda - spec[0]).abs() <= 1e-9 * spec[0]);

        // phases from the full eigenvector with the same common rotation rule
        let x_hat = project_unit_modulus(&v);
        let pv = mul_vec(&p, &mul_vec(&adjoint(&sep.a1), &x_hat));
        let theta = -inner(&sep.w1, &pv).arg();
        let phases = PhaseVector::continuous(x_hat.iter().map(|z| -(theta + z.arg())));
        let direct_route = sep.metric(MetricKind::SumRate, &phases).unwrap();
        let cf = closed_form_sum_rate(&sep).unwrap();
        assert!((cf.objective - direct_route).abs() <= 1e-6 * direct_route);
    }
}

#[test]
fn mse_reduction_agrees_with_pencil() {
    for (k, seed) in [(1, 1), (2, 2), (2, 3), (3, 4), (2, 5)] {
        let sep = instance(4, 2, k, 40 + seed);
        let p = gauss_inverse(&sep.q_sum);
        let n = sep.n() as f64;
        let pw1 = mul_vec(&p, &sep.w1);
        let alpha1 = inner(&pw1, &pw1).re / n;
        let alpha2 = (1.0 + inner(&sep.w1, &pw1).re) / n;
        let a1 = &sep.a1;
        let z1 = mul(&mul(a1, &mul(&p, &p)), &adjoint(a1)) / c(alpha1, 0.0) + identity(sep.n());
        let z2 = mul(&mul(a1, &p), &adjoint(a1)) / c(alpha2, 0.0) + identity(sep.n());
        let (lambda, _) = pencil_oracle(&z1, &z2);
        let (red, fallback) = mse_tot_eigvec(&sep).unwrap();
        assert!(!fallback);
        let q = rayleigh(&z1, &red.x_star) / rayleigh(&z2, &red.x_star);
        assert!((q - lambda).abs() <= 1e-7 * lambda, "{q} vs {lambda}");
        assert!((red.lambda - lambda).abs() <= 1e-7 * lambda);
    }
}

#[test]
fn mse_fallback_without_direct_link() {
    let c0 = cfg(4, 2, 2);
    let real = realize(&c0, &mut rng(7)).unwrap();
    let sep = separate_parts(
        &CMat::zeros(16, 2),
        &real.h_ru,
        &real.a_b,
        &real.a_r,
        real.beta_br,
        c0.sigma2(),
        false,
    )
    .unwrap();
    let r = closed_form_mse_tot(&sep).unwrap();
    assert!(r.has_warning(Warning::ZeroDirectTerm));
    // Z1 = A1 P^2 A1^H, Z2 = A1 P A1^H + I/N
    let p = gauss_inverse(&sep.q_sum);
    let a1 = &sep.a1;
    let z1 = mul(&mul(a1, &mul(&p, &p)), &adjoint(a1));
    let z2 = mul(&mul(a1, &p), &adjoint(a1)) + identity(8) / c(8.0, 0.0);
    let (lambda, _) = pencil_oracle(&z1, &z2);
    let (red, fallback) = mse_tot_eigvec(&sep).unwrap();
    assert!(fallback);
    assert!(
        (rayleigh(&z1, &red.x_star) / rayleigh(&z2, &red.x_star) - lambda).abs() <= 1e-7 * lambda
    );
}

#[test]
fn disconnected_ris_returns_zero_phases() {
    let c0 = cfg(4, 2, 2);
    let real = realize(&c0, &mut rng(8)).unwrap();
    let sep = separate_parts(
        &real.h_d,
        &CMat::zeros(8, 2),
        &real.a_b,
        &real.a_r,
        real.beta_br,
        c0.sigma2(),
        false,
    )
    .unwrap();
    let r = closed_form_mse_tot(&sep).unwrap();
    assert!(r.has_warning(Warning::NoRisContribution));
    assert_eq!(r.phases, PhaseVector::zeros(8));
    // with w = w1 fixed the error covariance is sigma^2 (Q + w1 w1^H)^-1
    let s = gauss_inverse(&(&sep.q_sum + &sep.w1 * sep.w1.adjoint()));
    let trace: f64 = s.diagonal().iter().map(|z| z.re).sum();
    assert!((r.objective - sep.sigma2 * trace).abs() <= 1e-9 * r.objective);
}

#[test]
fn projection_minimizes_l1_residual() {
    let mut r = rng(9);
    let x = random_vector(12, &mut r);
    let x_hat = project_unit_modulus(&x);
    let resid = |y: &CVec| -> f64 { x.iter().zip(y.iter()).map(|(a, b)| (a - b).norm()).sum() };
    let base = resid(&x_hat);
    for _ in 0..10_000 {
        let mut y = x_hat.clone();
        let n = r.random_range(0..12);
        y[n] *= c(0.0, r.random_range(-0.5..0.5)).exp();
        assert!(resid(&y) >= base - 1e-12);
    }
}

#[test]
fn closed_forms_beat_random_phases() {
    for seed in 0..10 {
        let sep = instance(8, 4, 2, 50 + seed);
        let mut r = rng(seed);
        let randoms: Vec<PhaseVector> = (0..100).map(|_| random_phases(32, &mut r)).collect();
        let mean = |kind| -> f64 {
            randoms
                .iter()
                .map(|x| sep.metric(kind, x).unwrap())
                .sum::<f64>()
                / 100.0
        };
        let sr = closed_form_sum_rate(&sep).unwrap();
        assert!(sr.objective >= mean(MetricKind::SumRate));
        let mse = closed_form_mse_tot(&sep).unwrap();
        assert!(mse.objective < mean(MetricKind::MseTot));
    }
}

#[test]
fn ascent_stays_at_matched_optimum() {
    let sep = no_direct_single_user(6, 11);
    let cf = closed_form_sum_rate(&sep).unwrap();
    let obj = SeparatedObjective {
        kind: MetricKind::SumRate,
        sep: &sep,
    };
    let r = projected_ascent(
        &obj,
        std::slice::from_ref(&cf.phases),
        &AscentOptions::default(),
    )
    .unwrap();
    assert!((r.objective - cf.objective).abs() <= 1e-9 * cf.objective);
}

#[test]
fn baseline_dominates_its_closed_form_start() {
    for seed in 0..5 {
        let sep = instance(2, 2, 2, 60 + seed);
        let cf = closed_form_sum_rate(&sep).unwrap();
        let b = projected_ascent_baseline(MetricKind::SumRate, &sep, 3, &mut rng(seed)).unwrap();
        assert!(b.objective >= cf.objective);
        let cm = closed_form_mse_tot(&sep).unwrap();
        let b = projected_ascent_baseline(MetricKind::MseTot, &sep, 3, &mut rng(seed)).unwrap();
        assert!(b.objective <= cm.objective);
    }
}

#[test]
fn baseline_restarts_saturate() {
    let mut few = 0.0;
    let mut many = 0.0;
    for seed in 0..50 {
        let sep = instance(4, 2, 2, 70 + seed);
        few += projected_ascent_baseline(MetricKind::SumRate, &sep, 20, &mut rng(seed))
            .unwrap()
            .objective;
        many += projected_ascent_baseline(MetricKind::SumRate, &sep, 200, &mut rng(seed))
            .unwrap()
            .objective;
    }
    assert!(many >= few);
    assert!(
        (many - few) / many < 0.01,
        "20 restarts {few}, 200 restarts {many}"
    );
}

#[test]
fn random_phase_statistics() {
    let mut r = rng(12);
    let draws = 100_000;
    let mut sums = [c(0.0, 0.0); 4];
    for _ in 0..draws {
        for (s, z) in sums
            .iter_mut()
            .zip(random_phases(4, &mut r).coefficients().iter())
        {
            *s += z;
        }
    }
    assert!(sums.iter().all(|s| s.norm() / (draws as f64) < 0.02));
    assert_eq!(random_phases(5, &mut rng(1)), random_phases(5, &mut rng(1)));
    assert!(random_phases(0, &mut r).is_empty());
}

/// How much the cross term `2 Re(x^H A1 P w1)` weighs against the quadratic
/// term at the sum-rate solution; printed for inspection.
#[test]
fn cross_term_share_by_ris_size() {
    for (n_y, n_z) in [(4, 4), (8, 8), (16, 16)] {
        let mut ratios = Vec::new();
        for seed in 0..5 {
            let sep = instance(n_y, n_z, 2, 80 + seed);
            let r = closed_form_sum_rate(&sep).unwrap();
            let x = r.phases.coefficients().map(|z| z.conj());
            let p = sep.p_sum();
            let ax = sep.a1.adjoint() * &x;
            let cross = 2.0 * ax.dotc(&(p * &sep.w1)).re.abs();
            let quad = ax.dotc(&(p * &ax)).re;
            ratios.push(cross / quad);
        }
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        assert!(mean.is_finite());
        eprintln!("N = {:>3}: mean cross/quadratic ratio {mean:.4}", n_y * n_z);
    }
}

proptest! {
    #![proptest_config(cases(16))]

    #[test]
    fn reported_objectives_are_recomputable(seed in any::<u64>(), k in 1usize..=4) {
        let sep = instance(4, 2, k, seed);
        let mut results = vec![
            (MetricKind::SumRate, closed_form_sum_rate(&sep).unwrap()),
            (MetricKind::MseTot, closed_form_mse_tot(&sep).unwrap()),
        ];
        for kind in MetricKind::ALL {
            results.push((kind, muiq(kind, &sep, 2, 1).unwrap()));
        }
        for (kind, r) in results {
            let v = sep.metric(kind, &r.phases).unwrap();
            prop_assert!((v - r.objective).abs() <= 1e-9 * v.abs());
        }
    }
}
