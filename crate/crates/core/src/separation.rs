//! Channel separation for a rank-one RIS-BS link.
//!
//! Rotating the global channel by the left singular vectors of `H_br`
//! confines every phase-dependent term to one row `w^H`. With `P = Q^{-1}`
//! computed once per realization, each metric then costs `O(K^2)` per
//! phase candidate on top of forming `w`.
//!
//! Phase convention: with physical reflection coefficients `c_n = e^{j phi_n}`,
//! `w = w1 + A1^H x` where `x = conj(c)`.

use std::f64::consts::LN_2;

use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::metrics::{MetricKind, ZF_MAX_CONDITION};
use crate::numerics::{
    hermitian_eigen, hermitian_inverse, hermitian_logdet, smw_inverse, CMatrix, CVector,
};
pub use crate::phases::{PhaseRepr, PhaseVector};

#[derive(Debug, Clone)]
pub struct SeparatedChannel {
    /// `H_d^H a_b / sqrt(M)`.
    pub w1: CVector,
    /// `sqrt(M beta) Diag(a_r^H) H_ru`, `N x K`.
    pub a1: CMatrix,
    pub q_sum: CMatrix,
    pub q_zf: CMatrix,
    pub sigma2: f64,
    /// RIS departure steering vector; sets the offset of discrete phases.
    pub a_r: CVector,
    /// Built from the LOS part of a scattered RIS-BS channel.
    pub forced: bool,
    p_sum: CMatrix,
    p_zf: Option<CMatrix>,
    zf_condition: f64,
    /// `log2 det(Q_sum / sigma^2)`.
    log2det_q_sum_scaled: f64,
    /// Rows of `A1` conjugated: `w = w1 + sum_n cols[n] * x_n`.
    cols: Vec<CVector>,
}

/// Separation of a pure-LOS realization.
pub fn separate(real: &ChannelRealization, sigma2: f64) -> Result<SeparatedChannel> {
    if !real.pure_los {
        return Err(Error::validation(
            "channel separation requires rank-1 H_br; use separate_los_part to force it",
        ));
    }
    separate_parts(
        &real.h_d,
        &real.h_ru,
        &real.a_b,
        &real.a_r,
        real.los_gain(),
        sigma2,
        false,
    )
}

/// Separation built on the LOS part of `H_br` only.
///
/// The result describes the true channel only when the realization is pure
/// LOS; otherwise it is a design model and is marked `forced`.
pub fn separate_los_part(real: &ChannelRealization, sigma2: f64) -> Result<SeparatedChannel> {
    separate_parts(
        &real.h_d,
        &real.h_ru,
        &real.a_b,
        &real.a_r,
        real.los_gain(),
        sigma2,
        !real.pure_los,
    )
}

/// Separation from the raw factors of `H_br = sqrt(beta) a_b a_r^H`.
pub fn separate_parts(
    h_d: &CMatrix,
    h_ru: &CMatrix,
    a_b: &CVector,
    a_r: &CVector,
    beta: f64,
    sigma2: f64,
    forced: bool,
) -> Result<SeparatedChannel> {
    if !(sigma2 > 0.0) {
        return Err(Error::validation("noise power must be positive"));
    }
    let m = a_b.len();
    let n = a_r.len();
    let k = h_d.ncols();
    if h_d.nrows() != m || h_ru.nrows() != n || h_ru.ncols() != k {
        return Err(Error::validation("channel shapes are inconsistent"));
    }
    let mf = m as f64;
    let w1 = (h_d.adjoint() * a_b).unscale(mf.sqrt());
    // (I - a_b a_b^H / M) is an orthogonal projector, so
    // H_d^H (I - a_b a_b^H / M) H_d = (Pi H_d)^H (Pi H_d).
    let projected = h_d - a_b * (a_b.adjoint() * h_d).unscale(mf);
    let q_zf_raw = projected.adjoint() * &projected;
    let q_zf = (&q_zf_raw + q_zf_raw.adjoint()).scale(0.5);
    let q_sum = &q_zf + CMatrix::identity(k, k).scale(sigma2);

    let amp = (mf * beta).sqrt();
    let mut a1 = h_ru.clone();
    for (mut row, a) in a1.row_iter_mut().zip(a_r.iter()) {
        row *= a.conj() * amp;
    }

    let p_sum = hermitian_inverse(&q_sum)?;
    let log2det_q_sum_scaled = hermitian_logdet(&q_sum.unscale(sigma2))? / LN_2;

    let zf_condition = {
        let (vals, _) = hermitian_eigen(&q_zf)?;
        let (hi, lo) = (vals[0], *vals.last().expect("K >= 1"));
        if lo <= 0.0 || hi <= 0.0 {
            f64::INFINITY
        } else {
            hi / lo
        }
    };
    let p_zf = if zf_condition <= ZF_MAX_CONDITION {
        hermitian_inverse(&q_zf).ok()
    } else {
        None
    };

    let cols = a1.row_iter().map(|r| r.adjoint()).collect();
    Ok(SeparatedChannel {
        w1,
        a1,
        q_sum,
        q_zf,
        sigma2,
        a_r: a_r.clone(),
        forced,
        p_sum,
        p_zf,
        zf_condition,
        log2det_q_sum_scaled,
        cols,
    })
}

impl SeparatedChannel {
    pub fn n(&self) -> usize {
        self.a1.nrows()
    }

    pub fn k(&self) -> usize {
        self.a1.ncols()
    }

    /// `Q_sum^{-1}` (also `Q_MMSE^{-1}`).
    pub fn p_sum(&self) -> &CMatrix {
        &self.p_sum
    }

    pub fn p_zf(&self) -> Result<&CMatrix> {
        self.p_zf.as_ref().ok_or(Error::RankDeficient {
            condition: self.zf_condition,
        })
    }

    pub fn q_mmse(&self) -> &CMatrix {
        &self.q_sum
    }

    /// Contribution vector of RIS element `n`: `w` gains `col(n) * x_n`.
    pub fn col(&self, n: usize) -> &CVector {
        &self.cols[n]
    }

    /// `w` for physical reflection coefficients.
    pub fn w_from_coefficients(&self, coefficients: &CVector) -> Result<CVector> {
        if coefficients.len() != self.n() {
            return Err(Error::validation(format!(
                "phase vector has {} entries, RIS has {}",
                coefficients.len(),
                self.n()
            )));
        }
        let x = coefficients.map(|z| z.conj());
        Ok(&self.w1 + self.a1.adjoint() * x)
    }

    pub fn w(&self, phases: &PhaseVector) -> Result<CVector> {
        self.w_from_coefficients(&phases.coefficients())
    }

    pub fn metric(&self, kind: MetricKind, phases: &PhaseVector) -> Result<f64> {
        self.metric_at_w(kind, &self.w(phases)?)
    }

    /// Metric value as a function of `w` alone.
    pub fn metric_at_w(&self, kind: MetricKind, w: &CVector) -> Result<f64> {
        let s2 = self.sigma2;
        match kind {
            MetricKind::SumRate => {
                let pw = &self.p_sum * w;
                let quad = w.dotc(&pw).re;
                Ok(self.log2det_q_sum_scaled + (1.0 + quad).log2())
            }
            MetricKind::ZfRate => Ok(updated_diagonal(self.p_zf()?, w)?
                .map(|d| (1.0 + 1.0 / (s2 * d)).log2())
                .sum()),
            MetricKind::MmseRate => Ok(updated_diagonal(&self.p_sum, w)?
                .map(|d| -(s2 * d).log2())
                .sum()),
            MetricKind::MseTot => Ok(s2 * self.mse_trace_at_w(w)),
        }
    }

    /// `tr S(Q_MMSE) = tr P - w^H P^2 w / (1 + w^H P w)`, without the
    /// `sigma^2` factor of the physical error covariance.
    pub fn mse_trace_at_w(&self, w: &CVector) -> f64 {
        let pw = &self.p_sum * w;
        let quad = w.dotc(&pw).re;
        let num = pw.norm_squared();
        let trace: f64 = self.p_sum.diagonal().iter().map(|d| d.re).sum();
        trace - num / (1.0 + quad)
    }

    /// `S(Q) = (Q + w w^H)^{-1}` for the `Q` matrix of `kind`.
    pub fn s_matrix(&self, kind: MetricKind, w: &CVector) -> Result<CMatrix> {
        match kind {
            MetricKind::ZfRate => smw_inverse(self.p_zf()?, w),
            _ => smw_inverse(&self.p_sum, w),
        }
    }
}

/// Diagonal of `(Q + w w^H)^{-1}` from `P = Q^{-1}` without forming the matrix.
fn updated_diagonal<'a>(p: &'a CMatrix, w: &CVector) -> Result<impl Iterator<Item = f64> + 'a> {
    let pw = p * w;
    let denom = 1.0 + w.dotc(&pw).re;
    if denom.is_nan() || denom <= 0.0 {
        return Err(Error::numerical(
            format!("1 + w^H Q^-1 w = {denom:.3e} is not positive"),
            0,
        ));
    }
    Ok((0..p.nrows()).map(move |k| p[(k, k)].re - pw[k].norm_sqr() / denom))
}

pub fn w_of_phases(sep: &SeparatedChannel, x: &PhaseVector) -> Result<CVector> {
    sep.w(x)
}

pub fn separated_metric(kind: MetricKind, sep: &SeparatedChannel, x: &PhaseVector) -> Result<f64> {
    sep.metric(kind, x)
}
