//! Exact finite-buffer queueing analysis around one convolution recurrence,
//! the limit theorems that describe its growth, and a simulation oracle.
//!
//! The same forward recurrence drives every model here: busy periods and
//! losses of the M/GI/1/n queue, the GI/M/1/n loss series, the acceptance
//! threshold mixture of the message model, the band occupation of a
//! controlled dam, and the per-class series of a priority buffer with batch
//! departures. Each analytic quantity ships with its regime-matched
//! asymptotic prediction, and the `sim` module provides an independent
//! discrete-event estimate for cross-checking.

pub mod asymptotics;
pub mod convrec;
pub mod dam;
pub mod dist;
pub mod error;
pub mod gim;
pub mod messages;
pub mod mg1;
pub mod priority;
pub mod sim;

pub use error::{Error, Result};
