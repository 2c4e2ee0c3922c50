use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::CVector;

/// How a [`PhaseVector`] was produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PhaseRepr {
    Continuous,
    /// Grid phases `2*pi*m / 2^bits`, stored as the indices `m`. The physical
    /// phase of element `n` is the grid phase plus the angle of the RIS
    /// departure steering vector entry `a_r[n]`.
    Discrete {
        bits: u32,
        indices: Vec<u32>,
    },
}

/// RIS reflection phases in `[0, 2*pi)`, one per element.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector {
    phases: Vec<f64>,
    repr: PhaseRepr,
}

/// Wraps an angle into `[0, 2*pi)`.
pub fn wrap_phase(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

impl PhaseVector {
    pub fn continuous(phases: impl IntoIterator<Item = f64>) -> Self {
        PhaseVector {
            phases: phases.into_iter().map(wrap_phase).collect(),
            repr: PhaseRepr::Continuous,
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self::continuous(std::iter::repeat_n(0.0, n))
    }

    /// Physical phases `angle(a_r[n]) + 2*pi*indices[n] / 2^bits`.
    pub fn discrete(bits: u32, indices: Vec<u32>, a_r: &CVector) -> Result<Self> {
        if bits == 0 || bits > 16 {
            return Err(Error::validation(format!(
                "unsupported phase resolution {bits} bits"
            )));
        }
        if indices.len() != a_r.len() {
            return Err(Error::validation(format!(
                "{} grid indices for {} RIS elements",
                indices.len(),
                a_r.len()
            )));
        }
        let levels = 1u32 << bits;
        if let Some(bad) = indices.iter().find(|&&m| m >= levels) {
            return Err(Error::validation(format!(
                "grid index {bad} out of range for {bits} bits"
            )));
        }
        let phases = indices
            .iter()
            .zip(a_r.iter())
            .map(|(&m, a)| wrap_phase(a.arg() + grid_phase(bits, m)))
            .collect();
        Ok(PhaseVector {
            phases,
            repr: PhaseRepr::Discrete { bits, indices },
        })
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn repr(&self) -> &PhaseRepr {
        &self.repr
    }

    /// Reflection coefficients `exp(j*phi)`.
    pub fn coefficients(&self) -> CVector {
        CVector::from_iterator(
            self.phases.len(),
            self.phases.iter().map(|&p| Complex64::from_polar(1.0, p)),
        )
    }
}

/// `2*pi*m / 2^bits`.
pub fn grid_phase(bits: u32, m: u32) -> f64 {
    TAU * f64::from(m) / f64::from(1u32 << bits)
}

/// I.i.d. uniform phases on `[0, 2*pi)`.
pub fn random_phases<R: Rng + ?Sized>(n: usize, rng: &mut R) -> PhaseVector {
    PhaseVector::continuous((0..n).map(|_| rng.random_range(0.0..TAU)))
}
