//! Committee dissemination: a committee holding a common value spreads it
//! to the whole system with one RS symbol per member.
//!
//! Round 1: member `c` of the committee broadcasts symbol `c + 1` of the
//! encoding with data count `y' + 1`. Round 2 carries no traffic; at its
//! end every process decodes from whatever arrived.

use log::debug;

use crate::coding::{decode_proposal, encode_proposal, symbol_len};
use crate::error::ProtocolError;
use crate::gf_rs::Symbol;
use crate::sim_engine::message::{broadcast, Body, Inbox, RoundMachine};
use crate::value::Proposal;

pub const CD_ROUNDS: u8 = 2;

/// Committee `[start, start + len)` inside ranks `0..entire`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CommitteeConfig {
    entire: usize,
    start: usize,
    len: usize,
}

impl CommitteeConfig {
    /// The committee must hold `⌈x/2⌉` or `⌊x/2⌋` of the `x` processes.
    pub fn new(entire: usize, start: usize, len: usize) -> Result<Self, ProtocolError> {
        let half_ok = len == entire / 2 || len == entire.div_ceil(2);
        if len == 0 || !half_ok || start + len > entire {
            return Err(ProtocolError::CommitteeSize {
                committee: len,
                entire,
            });
        }
        Ok(CommitteeConfig { entire, start, len })
    }

    pub fn entire(&self) -> usize {
        self.entire
    }

    pub fn committee_len(&self) -> usize {
        self.len
    }

    /// Greatest `y'` with `3y' < x'`.
    pub fn y_prime(&self) -> usize {
        (self.len - 1) / 3
    }

    pub fn k(&self) -> usize {
        self.y_prime() + 1
    }

    /// Committee rank of entire-rank `rank`, if a member.
    pub fn committee_rank(&self, rank: usize) -> Option<usize> {
        (self.start..self.start + self.len)
            .contains(&rank)
            .then(|| rank - self.start)
    }

    pub fn members(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len
    }
}

/// The symbol a committee member broadcasts in round 1.
pub fn cd_disseminate(
    v: &Proposal,
    cfg: &CommitteeConfig,
    my_rank: usize,
    capacity_bits: usize,
) -> Result<Symbol, ProtocolError> {
    let c = cfg
        .committee_rank(my_rank)
        .ok_or(ProtocolError::NotCommitteeMember(my_rank))?;
    let cw = encode_proposal(v, capacity_bits, cfg.committee_len(), cfg.k())?;
    Ok(cw.symbol(c + 1).clone())
}

/// Decode from the round-1 symbols; `received[c]` is committee member `c`'s
/// symbol, already checked for length.
pub fn cd_obtain(
    cfg: &CommitteeConfig,
    received: &[Option<&Symbol>],
    capacity_bits: usize,
) -> Option<Proposal> {
    let x = cfg.committee_len();
    let y = cfg.y_prime();
    let symbols: Vec<Symbol> = received
        .iter()
        .enumerate()
        .filter_map(|(c, s)| s.map(|s| s.with_index((c + 1) as u16)))
        .collect();
    let rec = symbols.len();
    if rec < x - y {
        return None;
    }
    // rec <= x' and 3y' < x' give rec >= (y'+1) + 2(rec - (x'-y'))
    match decode_proposal(cfg.k(), rec - (x - y), &symbols, capacity_bits) {
        Ok(v) => Some(v),
        Err(e) => {
            debug!("dissemination decode failed: {e}");
            None
        }
    }
}

/// Per-process driver; every process of `entire` runs one.
#[derive(Clone, Debug)]
pub struct CdProcess {
    cfg: CommitteeConfig,
    me: usize,
    capacity_bits: usize,
    outgoing: Option<Symbol>,
    received: Vec<Option<Symbol>>,
    obtained: Option<Proposal>,
    finished: bool,
}

impl CdProcess {
    /// `input` is required from committee members and ignored otherwise.
    pub fn new(
        cfg: CommitteeConfig,
        me: usize,
        input: Option<&Proposal>,
        capacity_bits: usize,
    ) -> Result<Self, ProtocolError> {
        if me >= cfg.entire() {
            return Err(ProtocolError::RankOutOfRange {
                rank: me,
                size: cfg.entire(),
            });
        }
        let outgoing = match (cfg.committee_rank(me), input) {
            (Some(_), Some(v)) => Some(cd_disseminate(v, &cfg, me, capacity_bits)?),
            (Some(_), None) => return Err(ProtocolError::NotCommitteeMember(me)),
            (None, _) => None,
        };
        Ok(CdProcess {
            cfg,
            me,
            capacity_bits,
            outgoing,
            received: vec![None; cfg.committee_len()],
            obtained: None,
            finished: false,
        })
    }

    pub fn obtained(&self) -> Option<&Proposal> {
        self.obtained.as_ref()
    }

    pub fn finished(&self) -> bool {
        self.finished
    }
}

impl RoundMachine for CdProcess {
    fn rounds(&self) -> u8 {
        CD_ROUNDS
    }

    fn send(&mut self, step: u8) -> Vec<(usize, Body)> {
        match (step, &self.outgoing) {
            (1, Some(s)) => broadcast(self.cfg.entire(), Body::Reconstruct(s.clone())),
            _ => Vec::new(),
        }
    }

    fn deliver(&mut self, step: u8, inbox: &Inbox<'_>) {
        match step {
            1 => {
                let len = symbol_len(self.capacity_bits, self.cfg.k());
                for rank in self.cfg.members() {
                    if let Some(Body::Reconstruct(s)) = inbox.get(rank) {
                        if s.len() == len {
                            self.received[rank - self.cfg.start] = Some(s.clone());
                        }
                    }
                }
            }
            2 => {
                let refs: Vec<Option<&Symbol>> = self.received.iter().map(|s| s.as_ref()).collect();
                self.obtained = cd_obtain(&self.cfg, &refs, self.capacity_bits);
                self.finished = true;
                if self.obtained.is_none() {
                    debug!("p{} obtained nothing", self.me);
                }
            }
            _ => {}
        }
    }
}
