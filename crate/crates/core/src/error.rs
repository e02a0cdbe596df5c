use thiserror::Error;

use crate::gf_rs::RsError;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("need n >= 3t + 1, got n={n}, t={t}")]
    Resilience { n: usize, t: usize },
    #[error("process rank {rank} outside 0..{size}")]
    RankOutOfRange { rank: usize, size: usize },
    #[error("committee of {committee} cannot serve a system of {entire}")]
    CommitteeSize { committee: usize, entire: usize },
    #[error("rank {0} is not a committee member")]
    NotCommitteeMember(usize),
    #[error(transparent)]
    Codec(#[from] RsError),
}
