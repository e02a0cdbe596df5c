//! Long-value graded consensus: Reduce-COOL, then one-bit graded consensus
//! on the COOL vote, then a two-round reconstruction of the surviving value.
//!
//! | round | content |
//! |-------|---------|
//! | 1–4   | Reduce-COOL |
//! | 5–6   | binary graded consensus on the vote |
//! | 7     | help symbols from every process still holding a value |
//! | 8     | share broadcast and decode |

use std::collections::HashMap;

use log::debug;

use crate::binary_gc::{BgcProcess, Grade};
use crate::coding::{decode_proposal, symbol_len};
use crate::error::ProtocolError;
use crate::gf_rs::{Gf16, Symbol};
use crate::reduce_cool::{data_count, CoolOutput, CoolProcess, CoolState};
use crate::sim_engine::message::{broadcast, Body, Inbox, RoundMachine};
use crate::value::Proposal;

pub const GC_ROUNDS: u8 = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedDecision {
    pub value: Proposal,
    pub grade: Grade,
}

/// Plurality of the candidate symbols; ties go to the lexicographically
/// smallest element string. `None` when there are no candidates.
pub fn majority<'a, I>(candidates: I) -> Option<&'a [Gf16]>
where
    I: IntoIterator<Item = &'a [Gf16]>,
{
    let mut counts: HashMap<&[Gf16], usize> = HashMap::new();
    for c in candidates {
        *counts.entry(c).or_default() += 1;
    }
    counts
        .into_iter()
        .max_by(|(a, ca), (b, cb)| ca.cmp(cb).then_with(|| b.cmp(a)))
        .map(|(s, _)| s)
}

/// Share of a process whose own symbols did not survive COOL: the plurality
/// of the help received from `S1` members, or a zero symbol without any.
/// `helps[j]` is process `j`'s well-formed help, if any.
pub fn repaired_share(s1: &[bool], helps: &[Option<&Symbol>], me: usize, len: usize) -> Symbol {
    let from_s1 = helps
        .iter()
        .zip(s1)
        .filter(|(_, &member)| member)
        .filter_map(|(h, _)| h.map(|s| s.elements()));
    let elements = match majority(from_s1) {
        Some(e) => e.to_vec(),
        None => vec![Gf16::ZERO; len],
    };
    Symbol::new((me + 1) as u16, elements)
}

/// Per-process driver for the eight rounds.
#[derive(Clone, Debug)]
pub struct GcProcess {
    me: usize,
    n: usize,
    t: usize,
    capacity_bits: usize,
    proposal: Proposal,
    cool: CoolProcess,
    cool_out: Option<CoolOutput>,
    bgc: Option<BgcProcess>,
    grade: Grade,
    share: Option<Symbol>,
    decision: Option<GradedDecision>,
    decided_early: bool,
    decode_failed: bool,
}

impl GcProcess {
    /// `capacity_bits` is the longest value any correct process in this
    /// instance can propose; it fixes the symbol size.
    pub fn new(
        proposal: Proposal,
        n: usize,
        t: usize,
        me: usize,
        capacity_bits: usize,
    ) -> Result<Self, ProtocolError> {
        let state = CoolState::init(proposal.clone(), n, t, me, capacity_bits)?;
        Ok(GcProcess {
            me,
            n,
            t,
            capacity_bits,
            proposal,
            cool: CoolProcess::new(state),
            cool_out: None,
            bgc: None,
            grade: Grade::Zero,
            share: None,
            decision: None,
            decided_early: false,
            decode_failed: false,
        })
    }

    pub fn k(&self) -> usize {
        data_count(self.t)
    }

    pub fn symbol_len(&self) -> usize {
        symbol_len(self.capacity_bits, self.k())
    }

    pub fn decision(&self) -> Option<&GradedDecision> {
        self.decision.as_ref()
    }

    /// Reduce-COOL's result, once round 4 has been delivered.
    pub fn cool_output(&self) -> Option<&CoolOutput> {
        self.cool_out.as_ref()
    }

    pub fn binary_decision(&self) -> Option<crate::binary_gc::BitGradedDecision> {
        self.bgc.as_ref().and_then(|b| b.decision())
    }

    /// Whether the process decided at grade 0 right after the binary step.
    pub fn decided_early(&self) -> bool {
        self.decided_early
    }

    /// Set when the reconstruction decode found no consistent value.
    pub fn decode_failed(&self) -> bool {
        self.decode_failed
    }

    /// The symbol broadcast in round 8.
    pub fn share(&self) -> Option<&Symbol> {
        self.share.as_ref()
    }

    fn well_formed<'a>(&self, b: Option<&'a Body>, want_help: bool) -> Option<&'a Symbol> {
        let len = self.symbol_len();
        match b {
            Some(Body::Help(s)) if want_help && s.len() == len => Some(s),
            Some(Body::Share(s)) if !want_help && s.len() == len => Some(s),
            _ => None,
        }
    }

    fn repair_share(&mut self, inbox: &Inbox<'_>) {
        let out = self
            .cool_out
            .as_ref()
            .expect("COOL output before reconstruction");
        let share = if out.success {
            self.cool.state().my_symbol(self.me).clone()
        } else {
            let helps: Vec<Option<&Symbol>> = (0..self.n)
                .map(|j| self.well_formed(inbox.get(j), true))
                .collect();
            repaired_share(&out.s1, &helps, self.me, self.symbol_len())
        };
        self.share = Some(share);
    }

    fn reconstruct(&mut self, inbox: &Inbox<'_>) {
        let len = self.symbol_len();
        let received: Vec<Symbol> = (0..self.n)
            .map(|j| {
                let idx = (j + 1) as u16;
                match self.well_formed(inbox.get(j), false) {
                    Some(s) => s.with_index(idx),
                    None => Symbol::zero(idx, len),
                }
            })
            .collect();
        // n >= 3t + 1 >= k + 2t, so the unique-decoding bound holds
        let value = match decode_proposal(self.k(), self.t, &received, self.capacity_bits) {
            Ok(v) => v,
            Err(e) => {
                debug!("p{} reconstruction decode failed: {e}", self.me);
                self.decode_failed = true;
                Proposal::Bottom
            }
        };
        self.decision = Some(GradedDecision {
            value,
            grade: self.grade,
        });
    }
}

impl RoundMachine for GcProcess {
    fn rounds(&self) -> u8 {
        GC_ROUNDS
    }

    fn send(&mut self, step: u8) -> Vec<(usize, Body)> {
        match step {
            1..=4 => self.cool.send(step),
            5 | 6 => self
                .bgc
                .as_mut()
                .expect("binary step after COOL")
                .send(step - 4),
            7 => match self.cool_out.as_ref().and_then(|o| o.omega.as_ref()) {
                Some(_) => self
                    .cool
                    .state()
                    .my_symbols()
                    .iter()
                    .enumerate()
                    .map(|(j, s)| (j, Body::Help(s.clone())))
                    .collect(),
                None => Vec::new(),
            },
            8 => match &self.share {
                Some(s) => broadcast(self.n, Body::Share(s.clone())),
                None => Vec::new(),
            },
            _ => Vec::new(),
        }
    }

    fn deliver(&mut self, step: u8, inbox: &Inbox<'_>) {
        match step {
            1..=3 => self.cool.deliver(step, inbox),
            4 => {
                self.cool.deliver(step, inbox);
                let out = self.cool.output().cloned().expect("COOL concluded");
                self.bgc = Some(BgcProcess::new(self.n, self.t, out.vote));
                self.cool_out = Some(out);
            }
            5 => self.bgc.as_mut().expect("binary step").deliver(1, inbox),
            6 => {
                let bgc = self.bgc.as_mut().expect("binary step");
                bgc.deliver(2, inbox);
                let d = bgc.decision().expect("binary decision");
                self.grade = d.grade;
                if !d.bit {
                    self.decision = Some(GradedDecision {
                        value: self.proposal.clone(),
                        grade: Grade::Zero,
                    });
                    self.decided_early = true;
                }
            }
            7 => self.repair_share(inbox),
            8 if !self.decided_early => self.reconstruct(inbox),
            _ => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(v: &[u16]) -> Vec<Gf16> {
        v.iter().map(|&x| Gf16(x)).collect()
    }

    #[test]
    fn majority_plurality_and_ties() {
        let a = sym(&[1, 2]);
        let b = sym(&[0, 9]);
        let c = sym(&[3, 3]);
        let pick = majority([&a[..], &b[..], &a[..], &c[..]]).unwrap();
        assert_eq!(pick, &a[..]);
        let pick = majority([&a[..], &b[..]]).unwrap();
        assert_eq!(pick, &b[..]);
        assert!(majority(std::iter::empty()).is_none());
    }

    #[test]
    fn repair_listens_to_s1_only() {
        let good = Symbol::new(2, sym(&[7, 7]));
        let bad = Symbol::new(3, sym(&[1, 1]));
        let helps = [Some(&good), Some(&bad), Some(&bad), None];
        let s1 = [true, false, false, true];
        let share = repaired_share(&s1, &helps, 3, 2);
        assert_eq!(share.index(), 4);
        assert_eq!(share.elements(), &sym(&[7, 7])[..]);
        let share = repaired_share(&[false; 4], &helps, 0, 2);
        assert_eq!(share.elements(), &sym(&[0, 0])[..]);
    }
}
