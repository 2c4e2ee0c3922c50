//! Multi-user uplink simulation with a reconfigurable intelligent surface
//! (RIS): clustered channel generation, channel separation for rank-one
//! RIS-BS links, phase design algorithms and a Monte Carlo harness.

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod config;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod numerics;
pub mod optimizers;
pub mod phases;
pub mod separation;
pub mod validate;

pub use config::SystemConfig;
pub use error::{Error, Result};
pub use harness::{Method, SweepSpec};
pub use metrics::MetricKind;
pub use phases::{PhaseRepr, PhaseVector};
pub use separation::SeparatedChannel;
