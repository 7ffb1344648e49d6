//! Compact Squeeze/Expand convolutional networks on the CPU.
//!
//! The crate provides NU-LiteNet-A, NU-LiteNet-B and a SqueezeNet baseline
//! as declarative layer graphs, executes them forward and backward in pure
//! Rust, trains them with momentum SGD, and stores them in a small binary
//! checkpoint format.
//!
//! ```no_run
//! use nulite::{architectures::{build_nu_litenet, count_params, Variant}};
//!
//! let graph = build_nu_litenet(Variant::A, 50)?;
//! let report = count_params(&graph)?;
//! println!("{} parameters", report.total_params);
//! # Ok::<(), nulite::Error>(())
//! ```
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod architectures;
mod binio;
pub mod cli;
pub mod data;
mod error;
pub mod layers;
pub mod model;
pub mod store;
pub mod tensor;
pub mod train;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
pub use model::Network;
pub use tensor::{Rng, Tensor4};
