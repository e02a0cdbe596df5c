//! Error-free synchronous Byzantine agreement on long values by recursive
//! halving, plus the lock-step simulator used to test and measure it.
//!
//! Layering, bottom up:
//! - [`gf_rs`]: GF(2^16) arithmetic and the Reed–Solomon codec.
//! - [`binary_gc`], [`reduce_cool`]: the one-bit graded consensus and the
//!   value-reduction step.
//! - [`graded_consensus`], [`committee_dissemination`]: the two building
//!   blocks of the recursion.
//! - [`ext_protocol`]: the recursive agreement itself.
//! - [`sim_engine`]: network, adversaries, metrics, sweeps.

pub mod binary_gc;
pub mod coding;
pub mod committee_dissemination;
pub mod error;
pub mod ext_protocol;
pub mod gf_rs;
pub mod graded_consensus;
pub mod reduce_cool;
pub mod sim_engine;
pub mod value;

pub use error::ProtocolError;
pub use value::{BuiltinValidity, Proposal, Validity, ValidityRule, Value};
