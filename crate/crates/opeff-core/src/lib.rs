//! Modeling toolkit for single system operations: episodes in which a managed
//! system consumes measured input products and emits measured output products
//! between a start time `t_s` and a physical completion time `t_f`.
//!
//! The crate is organized as a chain of progressively more compact views of
//! one operation:
//!
//! 1. [`model::RegistrationModel`] — raw per-channel flow-rate signals as a
//!    sensor would record them.
//! 2. [`model::ReducedModel`] — every quantity signal scaled by its cost rate
//!    so that heterogeneous products become comparable (currency per time).
//! 3. [`model::SimplifiedModel`] — the reduced model compressed to two
//!    impulses: total input cost `RE` at `t_s` and total output cost `PE` at
//!    `t_f`, summarized by the triple `(PE, RE, Top)`.
//! 4. [`model::DeployedModel`] — the integrated (cumulative) view `ice(t)`,
//!    split into a closed flow `ibe(t)` that returns to zero by `t_f` and an
//!    open flow `ide(t)` carrying the settled surplus `PE − RE`.
//!
//! On top of the chain, [`indices`] computes the conditional return
//! `R = (PE − RE)/RE` and the duration-aware efficiency index `F`, and
//! [`plant`] + [`sweep`] provide a batch fluid-heating simulator with heater
//! wear and a control-parameter sweep that ranks operations by these indices.
//!
//! The crate is `no_std`-compatible (`alloc` required): disable default
//! features and enable `libm` for float math without libstd.

#![cfg_attr(not(feature = "std"), no_std)]
// Validation deliberately writes `!(x > 0.0)` so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

#[cfg(not(any(feature = "std", feature = "libm")))]
compile_error!("opeff-core requires either the `std` or the `libm` feature");

extern crate alloc;

pub mod error;
pub mod indices;
pub mod model;
pub mod plant;
pub mod signal;
pub mod sweep;

mod num;

pub use error::Error;
pub use signal::{CumulativeSignal, Signal, TimeGrid};

/// Convenience alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;
