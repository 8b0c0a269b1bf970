//! Robust composite indicators over a hierarchy of interacting criteria.
//!
//! The pipeline: normalize alternative evaluations ([`dataset`]), compile
//! decision-maker statements into linear constraints over a 2-additive
//! capacity ([`preferences`], [`capacity`]), check compatibility with an
//! ε-max linear program ([`lp`]), sample compatible capacities
//! ([`sampler`]) and summarize the induced rankings at every node of the
//! criteria tree ([`smaa`]). [`pipeline`] wires these together.

pub mod capacity;
pub mod dataset;
pub mod error;
pub mod hierarchy;
pub mod lp;
pub mod preferences;
pub mod sampler;
pub mod pipeline;
pub mod smaa;

pub use error::{Error, Result};
