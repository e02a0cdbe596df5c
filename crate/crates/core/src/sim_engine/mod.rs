//! Deterministic lock-step network, Byzantine strategies, bit accounting
//! and sweep tooling.

pub mod adversary;
pub mod engine;
pub mod fit;
pub mod message;
pub mod report;
pub mod run;
pub mod solo;
pub mod sweep;

use thiserror::Error;

use crate::error::ProtocolError;
use message::ProcessId;

pub use adversary::{CatalogAdversary, FaultPlan, Role, Scripted, Strategy};
pub use engine::{Adversary, Engine, EvalOrder, Node, Passive, Traffic};
pub use run::{run, run_with_adversary, ProposalMode, RunMetrics, RunSpec};
pub use solo::Solo;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("expected {expected} proposals, got {got}")]
    ProposalCount { expected: usize, got: usize },
    #[error("fault plan names {0}, which is not a process of this run")]
    UnknownProcess(ProcessId),
    #[error("{0}")]
    Proposals(String),
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
    #[error("empty sweep: {0}")]
    EmptySweep(&'static str),
}

/// Mixes a base seed with extra words (splitmix64 finalizer per word).
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    parts
        .iter()
        .fold(mix(base.wrapping_add(0x9E37_79B9_7F4A_7C15)), |acc, &p| {
            mix(acc ^ p.wrapping_add(0x9E37_79B9_7F4A_7C15))
        })
}
