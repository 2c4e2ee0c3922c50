use num_complex::Complex64;

use super::{OptimizerResult, Warning};
use crate::error::Result;
use crate::metrics::MetricKind;
use crate::numerics::{hermitian_inverse, reduced_max_eigvec, CMatrix, CVector, ReducedEigen};
use crate::phases::PhaseVector;
use crate::separation::SeparatedChannel;

/// Nearest unit-modulus vector: `exp(j arg x_n)` per entry (zero maps to 1).
pub fn project_unit_modulus(x: &CVector) -> CVector {
    x.map(|z| {
        if z.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            z / z.norm()
        }
    })
}

fn a1_is_zero(sep: &SeparatedChannel) -> bool {
    sep.a1.iter().all(|z| z.norm() == 0.0)
}

fn no_ris_result(kind: MetricKind, sep: &SeparatedChannel) -> Result<OptimizerResult> {
    let phases = PhaseVector::zeros(sep.n());
    let objective = sep.metric(kind, &phases)?;
    let mut warnings = vec![Warning::NoRisContribution];
    if sep.forced {
        warnings.push(Warning::ForcedSeparation);
    }
    Ok(OptimizerResult {
        phases,
        objective,
        evaluations: 1,
        trace: None,
        warnings,
    })
}

/// `2 Re(e^{j theta} z) = p cos(theta) + q sin(theta)` with `(p, q)` returned.
fn sinusoid(z: Complex64) -> (f64, f64) {
    (2.0 * z.re, -2.0 * z.im)
}

/// Common rotation `theta` for `x -> e^{j theta} x`, which the eigenvector
/// leaves undetermined but the `w1` cross term does not.
///
/// With `w = w1 + e^{j theta} v`, the sum-rate quadratic `w^H P w` is a
/// sinusoid in `theta` and the MSE reduction `|P w|^2 / (1 + w^H P w)` is a
/// ratio of sinusoids; both stationary points are solved exactly.
fn best_rotation(kind: MetricKind, sep: &SeparatedChannel, v: &CVector) -> f64 {
    let p = sep.p_sum();
    let pw1 = p * &sep.w1;
    let pv = p * v;
    let cross_quad = pw1.dotc(v); // w1^H P v
    match kind {
        MetricKind::SumRate => {
            if cross_quad.norm() == 0.0 {
                0.0
            } else {
                -cross_quad.arg()
            }
        }
        _ => {
            // numerator a + pn cos + qn sin, denominator c + pd cos + qd sin
            let a = pw1.norm_squared() + pv.norm_squared();
            let (pn, qn) = sinusoid(pw1.dotc(&pv));
            let c = 1.0 + sep.w1.dotc(&pw1).re + v.dotc(&pv).re;
            let (pd, qd) = sinusoid(cross_quad);
            let g = |t: f64| (a + pn * t.cos() + qn * t.sin()) / (c + pd * t.cos() + qd * t.sin());
            // d/dt g = 0  <=>  s_coef sin t + c_coef cos t + k = 0
            let s_coef = a * pd - pn * c;
            let c_coef = qn * c - a * qd;
            let k = qn * pd - pn * qd;
            let r = s_coef.hypot(c_coef);
            let mut candidates = vec![0.0];
            if r > 0.0 && k.abs() <= r {
                let base = c_coef.atan2(s_coef); // s sin t + c cos t = r sin(t + base)
                let off = (-k / r).asin();
                candidates.push(off - base);
                candidates.push(std::f64::consts::PI - off - base);
            }
            candidates
                .into_iter()
                .fold((0.0, f64::NEG_INFINITY), |best, t| {
                    let val = g(t);
                    if val > best.1 {
                        (t, val)
                    } else {
                        best
                    }
                })
                .0
        }
    }
}

fn finish(
    kind: MetricKind,
    sep: &SeparatedChannel,
    red: &ReducedEigen,
    mut warnings: Vec<Warning>,
) -> Result<OptimizerResult> {
    let x_hat = project_unit_modulus(&red.x_star);
    let v = sep.a1.adjoint() * &x_hat;
    let theta = best_rotation(kind, sep, &v);
    // x = conj(c)  =>  phi_n = -arg(e^{j theta} x_hat_n)
    let phases = PhaseVector::continuous(x_hat.iter().map(|z| -(theta + z.arg())));
    let objective = sep.metric(kind, &phases)?;
    if red.degenerate {
        warnings.push(Warning::DegenerateEigenvalue);
    }
    if red.below_null_space {
        warnings.push(Warning::NullSpaceDominates);
    }
    if sep.forced {
        warnings.push(Warning::ForcedSeparation);
    }
    Ok(OptimizerResult {
        phases,
        objective,
        evaluations: 1,
        trace: None,
        warnings,
    })
}

/// Unconstrained sum-rate design before projection.
///
/// Maximizes `x^H (nu I_N + A1 P A1^H) x` with `nu = w1^H P w1 / N`
/// through the `K x K` reduction.
pub fn sum_rate_eigvec(sep: &SeparatedChannel) -> Result<ReducedEigen> {
    let p = sep.p_sum();
    let nu = sep.w1.dotc(&(p * &sep.w1)).re / sep.n() as f64;
    reduced_max_eigvec(nu, p, &sep.a1)
}

/// Unconstrained total-MSE design before projection, together with the
/// flag telling whether the `w1 = 0` fallback was used.
pub fn mse_tot_eigvec(sep: &SeparatedChannel) -> Result<(ReducedEigen, bool)> {
    let p = sep.p_sum();
    let nf = sep.n() as f64;
    let pw1 = p * &sep.w1;
    let alpha1 = pw1.norm_squared() / nf;
    let alpha2 = (1.0 + sep.w1.dotc(&pw1).re) / nf;
    let gram = sep.a1.adjoint() * &sep.a1;
    let g = hermitian_inverse(&(sep.q_sum.scale(alpha2) + &gram))?;
    if alpha1 > 0.0 {
        let k = sep.k();
        let z3 = &g * (p.scale(alpha2 / alpha1) - CMatrix::identity(k, k));
        Ok((reduced_max_eigvec(1.0, &z3, &sep.a1)?, false))
    } else {
        // Z2^{-1} Z1 with Z1 = A1 P^2 A1^H, Z2 = A1 P A1^H + I / N equals
        // A1 G P A1^H for the alpha2 = 1 / N above.
        Ok((reduced_max_eigvec(0.0, &(&g * p), &sep.a1)?, true))
    }
}

/// Continuous-phase sum-rate design.
pub fn closed_form_sum_rate(sep: &SeparatedChannel) -> Result<OptimizerResult> {
    if a1_is_zero(sep) {
        return no_ris_result(MetricKind::SumRate, sep);
    }
    let red = sum_rate_eigvec(sep)?;
    finish(MetricKind::SumRate, sep, &red, Vec::new())
}

/// Continuous-phase total-MSE design.
pub fn closed_form_mse_tot(sep: &SeparatedChannel) -> Result<OptimizerResult> {
    if a1_is_zero(sep) {
        return no_ris_result(MetricKind::MseTot, sep);
    }
    let (red, fallback) = mse_tot_eigvec(sep)?;
    let warnings = if fallback {
        vec![Warning::ZeroDirectTerm]
    } else {
        Vec::new()
    };
    finish(MetricKind::MseTot, sep, &red, warnings)
}
