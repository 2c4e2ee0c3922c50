use super::{OptimizerResult, Warning};
use crate::error::{Error, Result};
use crate::metrics::MetricKind;
use crate::phases::PhaseVector;
use crate::separation::SeparatedChannel;

/// Largest search space `2^(b N)` the exhaustive search accepts.
pub const BRUTE_FORCE_MAX_POINTS: u64 = 1 << 20;

/// Exhaustive search over the `2^b`-level grid used by MUIQ.
///
/// Combinations are visited in lexicographic order of the index vector
/// (element 0 most significant); on exact ties the earliest one is kept.
pub fn brute_force_discrete(
    kind: MetricKind,
    sep: &SeparatedChannel,
    bits: u32,
) -> Result<OptimizerResult> {
    let n = sep.n();
    if bits == 0 {
        return Err(Error::validation("brute force needs at least one bit"));
    }
    let total_bits = u64::from(bits) * n as u64;
    if total_bits > 20 {
        return Err(Error::validation(format!(
            "brute force over 2^{total_bits} points exceeds the limit of {BRUTE_FORCE_MAX_POINTS}"
        )));
    }
    let levels = 1u32 << bits;
    let points = 1u64 << total_bits;
    let mut best: Option<(Vec<u32>, f64)> = None;
    let mut indices = vec![0u32; n];
    for code in 0..points {
        for (el, slot) in indices.iter_mut().enumerate() {
            let shift = bits as u64 * (n - 1 - el) as u64;
            *slot = ((code >> shift) & u64::from(levels - 1)) as u32;
        }
        let phases = PhaseVector::discrete(bits, indices.clone(), &sep.a_r)?;
        let value = sep.metric(kind, &phases)?;
        let better = match &best {
            None => true,
            Some((_, b)) => kind.better(value, *b),
        };
        if better {
            best = Some((indices.clone(), value));
        }
    }
    let (idx, objective) = best.expect("at least one grid point");
    let phases = PhaseVector::discrete(bits, idx, &sep.a_r)?;
    let warnings = if sep.forced {
        vec![Warning::ForcedSeparation]
    } else {
        Vec::new()
    };
    Ok(OptimizerResult {
        phases,
        objective,
        evaluations: points as usize,
        trace: None,
        warnings,
    })
}
