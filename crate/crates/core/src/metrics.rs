//! Uplink performance metrics evaluated directly on a global channel `H`.
//!
//! All rates are in bits/s/Hz with unit symbol power. `mse_tot` reports the
//! physical MMSE error `sigma^2 * tr((sigma^2 I + H^H H)^{-1})`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{hermitian_eigen, hermitian_inverse, hermitian_logdet, CMatrix};

/// Condition number of `H^H H` beyond which zero-forcing is refused.
pub const ZF_MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MetricKind {
    SumRate,
    ZfRate,
    MmseRate,
    MseTot,
}

impl MetricKind {
    pub const ALL: [MetricKind; 4] = [
        MetricKind::SumRate,
        MetricKind::ZfRate,
        MetricKind::MmseRate,
        MetricKind::MseTot,
    ];

    /// Rates are maximized; the total MSE is minimized.
    pub fn maximize(self) -> bool {
        !matches!(self, MetricKind::MseTot)
    }

    /// True when `a` is strictly better than `b` for this metric.
    pub fn better(self, a: f64, b: f64) -> bool {
        if self.maximize() {
            a > b
        } else {
            a < b
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::SumRate => "SumRate",
            MetricKind::ZfRate => "ZfRate",
            MetricKind::MmseRate => "MmseRate",
            MetricKind::MseTot => "MseTot",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MetricKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::validation(format!("unknown metric {s:?}")))
    }
}

fn check_sigma2(sigma2: f64) -> Result<()> {
    if sigma2 > 0.0 && sigma2.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(format!(
            "noise power must be positive, got {sigma2}"
        )))
    }
}

/// `I + H^H H / sigma^2`; identical in determinant ratio to the
/// unnormalized form but better scaled.
fn normalized_gram(h: &CMatrix, sigma2: f64) -> CMatrix {
    let k = h.ncols();
    (h.adjoint() * h).unscale(sigma2) + CMatrix::identity(k, k)
}

/// `-log2|(sigma^2 I + H^H H)^{-1}| - log2(sigma^{2K})`.
pub fn sum_rate(h: &CMatrix, sigma2: f64) -> Result<f64> {
    check_sigma2(sigma2)?;
    Ok(hermitian_logdet(&normalized_gram(h, sigma2))? / std::f64::consts::LN_2)
}

/// Condition number of a Hermitian PSD matrix (infinite if singular).
pub fn condition_number(gram: &CMatrix) -> Result<f64> {
    let (vals, _) = hermitian_eigen(gram)?;
    let hi = vals[0];
    let lo = *vals.last().expect("non-empty spectrum");
    if lo <= 0.0 || hi <= 0.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(hi / lo)
    }
}

/// `sum_k log2(1 + 1 / (sigma^2 [(H^H H)^{-1}]_kk))`.
pub fn zf_rate(h: &CMatrix, sigma2: f64) -> Result<f64> {
    check_sigma2(sigma2)?;
    if h.nrows() < h.ncols() {
        return Err(Error::RankDeficient {
            condition: f64::INFINITY,
        });
    }
    let gram = h.adjoint() * h;
    let condition = condition_number(&gram)?;
    if condition > ZF_MAX_CONDITION {
        return Err(Error::RankDeficient { condition });
    }
    let inv = hermitian_inverse(&gram).map_err(|_| Error::RankDeficient { condition })?;
    Ok(inv
        .diagonal()
        .iter()
        .map(|d| (1.0 + 1.0 / (sigma2 * d.re)).log2())
        .sum())
}

/// `sum_k log2(1 / (sigma^2 [(sigma^2 I + H^H H)^{-1}]_kk))`.
pub fn mmse_rate(h: &CMatrix, sigma2: f64) -> Result<f64> {
    check_sigma2(sigma2)?;
    // sigma^2 (sigma^2 I + G)^{-1} = (I + G / sigma^2)^{-1}
    let inv = hermitian_inverse(&normalized_gram(h, sigma2))?;
    Ok(inv.diagonal().iter().map(|d| -d.re.log2()).sum())
}

/// `sigma^2 * tr((sigma^2 I + H^H H)^{-1})`.
pub fn mse_tot(h: &CMatrix, sigma2: f64) -> Result<f64> {
    check_sigma2(sigma2)?;
    let inv = hermitian_inverse(&normalized_gram(h, sigma2))?;
    Ok(inv.diagonal().iter().map(|d: &Complex64| d.re).sum())
}

pub fn evaluate(kind: MetricKind, h: &CMatrix, sigma2: f64) -> Result<f64> {
    match kind {
        MetricKind::SumRate => sum_rate(h, sigma2),
        MetricKind::ZfRate => zf_rate(h, sigma2),
        MetricKind::MmseRate => mmse_rate(h, sigma2),
        MetricKind::MseTot => mse_tot(h, sigma2),
    }
}
