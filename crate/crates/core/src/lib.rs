//! Opinion alignment on a rewiring preferential-attachment network, driven
//! toward a target by a control that acts only on well-connected agents.
//!
//! The crate is organized bottom-up:
//!
//! - [`graph`]: the non-growing network and its rewiring process,
//! - [`degree_master`]: the degree-distribution master equation and its
//!   stationary laws,
//! - [`opinion`]: interaction kernels and the alignment field,
//! - [`control`]: one-step and finite-horizon degree-selective controllers,
//! - [`sim`]: the coupled loop, consensus metrics and threshold sweeps,
//! - [`cli`]: configuration files, run manifests and the `opnet` commands.

pub mod cli;
pub mod control;
pub mod degree_master;
pub mod error;
pub mod graph;
pub mod opinion;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
