use num_complex::Complex64;

use super::{OptimizerResult, Warning};
use crate::error::{Error, Result};
use crate::metrics::MetricKind;
use crate::phases::{grid_phase, PhaseVector};
use crate::separation::SeparatedChannel;

/// Multi-user iterative quantisation with the keep-incumbent tie rule.
pub fn muiq(
    kind: MetricKind,
    sep: &SeparatedChannel,
    bits: u32,
    repeats: usize,
) -> Result<OptimizerResult> {
    muiq_with(kind, sep, bits, repeats, false)
}

/// Multi-user iterative quantisation.
///
/// Starts from all grid indices at zero and sweeps the RIS elements in
/// order, trying every grid phase for the current element and keeping the
/// best. The sweep is repeated `repeats` times. With `tie_accept` a
/// candidate equal to the incumbent also replaces it.
///
/// Grid phases are relative to the RIS steering vector: the physical
/// coefficient of element `n` is `a_r[n] * exp(j 2 pi m / 2^bits)`.
pub fn muiq_with(
    kind: MetricKind,
    sep: &SeparatedChannel,
    bits: u32,
    repeats: usize,
    tie_accept: bool,
) -> Result<OptimizerResult> {
    if bits == 0 || bits > 16 {
        return Err(Error::validation(format!(
            "MUIQ needs 1..=16 bits, got {bits}"
        )));
    }
    if repeats == 0 {
        return Err(Error::validation("MUIQ needs at least one repeat"));
    }
    let n = sep.n();
    let levels = 1u32 << bits;

    // conj(a_r[n] * g_m) = conj(a_r[n]) * conj(g_m)
    let grid: Vec<Complex64> = (0..levels)
        .map(|m| Complex64::from_polar(1.0, -grid_phase(bits, m)))
        .collect();
    let offsets: Vec<Complex64> = sep.a_r.iter().map(|a| a.conj()).collect();
    let contrib = |el: usize, m: u32| offsets[el] * grid[m as usize];

    let mut indices = vec![0u32; n];
    // same arithmetic path as the final recomputation, so an unmoved start
    // reports exactly its initial value
    let start = PhaseVector::discrete(bits, indices.clone(), &sep.a_r)?;
    let mut w = sep.w(&start)?;
    let mut incumbent = sep.metric_at_w(kind, &w)?;
    let mut trace = vec![incumbent];
    let mut evaluations = 0usize;

    for _ in 0..repeats {
        #[allow(clippy::needless_range_loop)]
        for el in 0..n {
            let mut base = w.clone();
            base.axpy(
                -contrib(el, indices[el]),
                sep.col(el),
                Complex64::new(1.0, 0.0),
            );
            for m in 0..levels {
                let mut cand = base.clone();
                cand.axpy(contrib(el, m), sep.col(el), Complex64::new(1.0, 0.0));
                let value = sep.metric_at_w(kind, &cand)?;
                evaluations += 1;
                let accept = kind.better(value, incumbent) || (tie_accept && value == incumbent);
                if accept {
                    indices[el] = m;
                    incumbent = value;
                    w = cand;
                    trace.push(value);
                }
            }
        }
    }

    let phases = PhaseVector::discrete(bits, indices, &sep.a_r)?;
    let objective = sep.metric(kind, &phases)?;
    let mut warnings = Vec::new();
    if sep.forced {
        warnings.push(Warning::ForcedSeparation);
    }
    Ok(OptimizerResult {
        phases,
        objective,
        evaluations,
        trace: Some(trace),
        warnings,
    })
}
