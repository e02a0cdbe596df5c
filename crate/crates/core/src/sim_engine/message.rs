//! Wire envelope shared by every protocol layer.

use std::fmt;

use crate::gf_rs::Symbol;
use crate::reduce_cool::SymbolPair;

/// Global process identifier, `0..n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProcessId(pub usize);

impl fmt::Display for ProcessId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

/// Every payload a process can put on the wire.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Body {
    /// Reduce-COOL phase 1 symbol exchange.
    Pair(SymbolPair),
    /// Reduce-COOL success indicator (initial value or a 1 -> 0 flip).
    Indicator(bool),
    /// Binary graded consensus round-1 proposal.
    Vote(bool),
    /// Binary graded consensus round-2 echo.
    Echo(bool),
    /// Reconstruction round 1: the receiver's symbol of the sender's value.
    Help(Symbol),
    /// Reconstruction round 2: the sender's own (possibly repaired) symbol.
    Share(Symbol),
    /// Committee dissemination symbol.
    Reconstruct(Symbol),
}

impl Body {
    /// Semantic size: 1 per bit, symbol size per symbol, summed for pairs.
    pub fn bit_size(&self) -> u64 {
        match self {
            Body::Pair(p) => p.for_receiver.bit_size() + p.own.bit_size(),
            Body::Indicator(_) | Body::Vote(_) | Body::Echo(_) => 1,
            Body::Help(s) | Body::Share(s) | Body::Reconstruct(s) => s.bit_size(),
        }
    }
}

/// Which sub-protocol slot of an Ext instance a message belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Segment {
    /// A sub-protocol driven outside Ext (component tests and oracles).
    Standalone,
    Gc1,
    Cd1,
    Gc2,
    Cd2,
}

/// Protocol phase identifier carried by each message.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Tag {
    /// Member range `[lo, hi)` of the Ext instance.
    pub lo: u32,
    pub hi: u32,
    pub segment: Segment,
    /// 1-based round within the segment.
    pub step: u8,
}

impl Tag {
    pub fn standalone(n: usize, step: u8) -> Self {
        Tag {
            lo: 0,
            hi: n as u32,
            segment: Segment::Standalone,
            step,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundMessage {
    pub sender: ProcessId,
    pub receiver: ProcessId,
    pub tag: Tag,
    pub body: Body,
}

impl RoundMessage {
    pub fn bit_size(&self) -> u64 {
        self.body.bit_size()
    }
}

/// One round's messages to a process, at most one per sender rank.
///
/// Later duplicates from the same sender are dropped.
#[derive(Debug)]
pub struct Inbox<'a> {
    slots: Vec<Option<&'a Body>>,
}

impl<'a> Inbox<'a> {
    pub fn empty(size: usize) -> Self {
        Inbox {
            slots: vec![None; size],
        }
    }

    pub fn from_entries<I>(size: usize, entries: I) -> Self
    where
        I: IntoIterator<Item = (usize, &'a Body)>,
    {
        let mut inbox = Inbox::empty(size);
        for (rank, body) in entries {
            if rank < size && inbox.slots[rank].is_none() {
                inbox.slots[rank] = Some(body);
            }
        }
        inbox
    }

    pub fn size(&self) -> usize {
        self.slots.len()
    }

    pub fn get(&self, rank: usize) -> Option<&'a Body> {
        self.slots.get(rank).copied().flatten()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &'a Body)> + '_ {
        self.slots
            .iter()
            .enumerate()
            .filter_map(|(r, b)| b.map(|b| (r, b)))
    }

    /// Senders' bits for the bodies matched by `pick`.
    pub fn bits(&self, pick: impl Fn(&Body) -> Option<bool>) -> Vec<Option<bool>> {
        self.slots.iter().map(|b| b.and_then(&pick)).collect()
    }
}

/// A sub-protocol as a per-process lock-step state machine over member
/// ranks `0..size`.
pub trait RoundMachine {
    /// Number of rounds the machine runs for.
    fn rounds(&self) -> u8;

    /// Messages for round `step` (1-based), addressed by member rank.
    fn send(&mut self, step: u8) -> Vec<(usize, Body)>;

    /// Round `step`'s inbox, keyed by sender rank.
    fn deliver(&mut self, step: u8, inbox: &Inbox<'_>);
}

/// `body` addressed to every rank in `0..size`, self included.
pub fn broadcast(size: usize, body: Body) -> Vec<(usize, Body)> {
    (0..size).map(|r| (r, body.clone())).collect()
}

/// `body` addressed to every rank except `me`.
pub fn to_others(size: usize, me: usize, body: Body) -> Vec<(usize, Body)> {
    (0..size)
        .filter(|&r| r != me)
        .map(|r| (r, body.clone()))
        .collect()
}
