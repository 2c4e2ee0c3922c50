//! RIS phase design algorithms.
//!
//! * [`muiq`]: per-element search over a `2^b` phase grid.
//! * [`closed_form_sum_rate`] / [`closed_form_mse_tot`]: continuous-phase
//!   eigenvector designs with a unit-modulus projection.
//! * [`projected_ascent_baseline`]: multi-restart numerical reference.
//! * [`brute_force_discrete`]: exhaustive grid search, used as an oracle.

mod baseline;
mod brute_force;
mod closed_form;
mod muiq;

pub use baseline::{
    baseline_starts, projected_ascent, projected_ascent_baseline, AscentOptions, DirectObjective,
    PhaseObjective, SeparatedObjective,
};
pub use brute_force::{brute_force_discrete, BRUTE_FORCE_MAX_POINTS};
pub use closed_form::{
    closed_form_mse_tot, closed_form_sum_rate, mse_tot_eigvec, project_unit_modulus,
    sum_rate_eigvec,
};
pub use muiq::{muiq, muiq_with};

use crate::phases::PhaseVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Warning {
    /// The top eigenvalue used by a closed-form design is not simple.
    DegenerateEigenvalue,
    /// The design used the LOS part of a scattered RIS-BS channel.
    ForcedSeparation,
    /// The direct-path term `w1` vanished; the MSE design fell back to the
    /// pure Rayleigh quotient.
    ZeroDirectTerm,
    /// `A1 = 0`: the RIS has no influence on the metric.
    NoRisContribution,
    /// The reduced eigenvalue fell below the null-space eigenvalue of the
    /// full matrix.
    NullSpaceDominates,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerResult {
    pub phases: PhaseVector,
    /// Metric value at `phases`.
    pub objective: f64,
    /// Number of metric evaluations spent.
    pub evaluations: usize,
    /// Accepted objective values in order, when the algorithm records them.
    pub trace: Option<Vec<f64>>,
    pub warnings: Vec<Warning>,
}

impl OptimizerResult {
    pub fn has_warning(&self, w: Warning) -> bool {
        self.warnings.contains(&w)
    }
}
