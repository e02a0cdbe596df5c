//! Reduce-COOL: symbol exchange plus three rounds of success-indicator
//! gossip that leave at most one surviving long value among correct
//! processes and produce a binary vote.
//!
//! Rounds, for process `i`:
//! 1. send `(y_j, y_i)` to every `j != i`; count matching pairs into `u`;
//!    `s_i = 1` iff `sum(u) >= n - t`.
//! 2. send `s_i` to everyone else; unknown senders land in `S0`.
//! 3. if still successful, zero `u` over `S0` and drop to `s_i = 0` when
//!    `sum(u) < n - t`; only a flip is sent.
//! 4. the same flip rule again, then vote `1` iff at least `2t + 1`
//!    processes are last known to be successful.

use crate::coding::encode_proposal;
use crate::error::ProtocolError;
use crate::gf_rs::Symbol;
use crate::sim_engine::message::{to_others, Body, Inbox, RoundMachine};
use crate::value::Proposal;

/// Data-symbol count used by Reduce-COOL and reconstruction.
pub fn data_count(t: usize) -> usize {
    t / 5 + 1
}

/// Phase-1 message from `i` to `j`: `(y_j^(i), y_i^(i))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolPair {
    pub for_receiver: Symbol,
    pub own: Symbol,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Phase {
    Init,
    Exchanged,
    Announced,
    SecondCheck,
    Done,
}

/// What the protocol hands back to graded consensus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoolOutput {
    /// Surviving value, `None` for the "no value" marker.
    pub omega: Option<Proposal>,
    pub vote: bool,
    pub success: bool,
    /// `S1` membership by rank.
    pub s1: Vec<bool>,
}

impl CoolOutput {
    pub fn s1_members(&self) -> impl Iterator<Item = usize> + '_ {
        self.s1
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(j, _)| j)
    }
}

#[derive(Clone, Debug)]
pub struct CoolState {
    me: usize,
    n: usize,
    t: usize,
    omega: Option<Proposal>,
    my_symbols: Vec<Symbol>,
    u: Vec<bool>,
    s: bool,
    /// Last known indicator per rank; `false` covers "never heard".
    known: Vec<bool>,
    vote: bool,
    phase: Phase,
}

impl CoolState {
    /// Encodes the proposal; `capacity_bits` fixes the instance's symbol size.
    pub fn init(
        proposal: Proposal,
        n: usize,
        t: usize,
        me: usize,
        capacity_bits: usize,
    ) -> Result<Self, ProtocolError> {
        if n < 3 * t + 1 {
            return Err(ProtocolError::Resilience { n, t });
        }
        if me >= n {
            return Err(ProtocolError::RankOutOfRange { rank: me, size: n });
        }
        let my_symbols =
            encode_proposal(&proposal, capacity_bits, n, data_count(t))?.into_symbols();
        Ok(CoolState {
            me,
            n,
            t,
            omega: Some(proposal),
            my_symbols,
            u: vec![false; n],
            s: false,
            known: vec![false; n],
            vote: false,
            phase: Phase::Init,
        })
    }

    pub fn k(&self) -> usize {
        data_count(self.t)
    }

    pub fn omega(&self) -> Option<&Proposal> {
        self.omega.as_ref()
    }

    pub fn success(&self) -> bool {
        self.s
    }

    pub fn vote(&self) -> bool {
        self.vote
    }

    pub fn matches(&self) -> &[bool] {
        &self.u
    }

    /// `y_{rank+1}` of this process's own encoding.
    pub fn my_symbol(&self, rank: usize) -> &Symbol {
        &self.my_symbols[rank]
    }

    pub fn my_symbols(&self) -> &[Symbol] {
        &self.my_symbols
    }

    pub fn s1(&self) -> impl Iterator<Item = usize> + '_ {
        self.known
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(j, _)| j)
    }

    pub fn s0(&self) -> impl Iterator<Item = usize> + '_ {
        self.known
            .iter()
            .enumerate()
            .filter(|(_, &b)| !b)
            .map(|(j, _)| j)
    }

    /// Phase-1 sends, one pair per other process.
    pub fn outgoing_pairs(&self) -> Vec<(usize, SymbolPair)> {
        (0..self.n)
            .filter(|&j| j != self.me)
            .map(|j| {
                (
                    j,
                    SymbolPair {
                        for_receiver: self.my_symbols[j].clone(),
                        own: self.my_symbols[self.me].clone(),
                    },
                )
            })
            .collect()
    }

    /// Match check on received pairs; returns the indicator to broadcast.
    ///
    /// `pairs[j]` is the pair from rank `j` (own slot ignored).
    pub fn phase1(&mut self, pairs: &[Option<&SymbolPair>]) -> bool {
        assert_eq!(self.phase, Phase::Init, "phase1 called twice");
        for j in 0..self.n {
            self.u[j] = if j == self.me {
                true
            } else {
                pairs.get(j).copied().flatten().is_some_and(|p| {
                    p.for_receiver.same_elements(&self.my_symbols[self.me])
                        && p.own.same_elements(&self.my_symbols[j])
                })
            };
        }
        self.s = self.match_count() >= self.n - self.t;
        if !self.s {
            self.omega = None;
        }
        self.known[self.me] = self.s;
        self.phase = Phase::Exchanged;
        self.s
    }

    /// Merges phase-1 indicators, then applies the flip rule.
    pub fn phase2(&mut self, indicators: &[Option<bool>]) -> Option<bool> {
        assert_eq!(self.phase, Phase::Exchanged, "phase2 out of order");
        for j in (0..self.n).filter(|&j| j != self.me) {
            self.known[j] = indicators.get(j).copied().flatten().unwrap_or(false);
        }
        self.phase = Phase::Announced;
        self.flip_check()
    }

    /// Merges phase-2 flips, then applies the flip rule.
    pub fn phase3(&mut self, flips: &[Option<bool>]) -> Option<bool> {
        assert_eq!(self.phase, Phase::Announced, "phase3 out of order");
        self.merge_flips(flips);
        self.phase = Phase::SecondCheck;
        self.flip_check()
    }

    /// Merges phase-3 flips and casts the vote.
    pub fn conclude(&mut self, flips: &[Option<bool>]) -> CoolOutput {
        assert_eq!(self.phase, Phase::SecondCheck, "conclude out of order");
        self.merge_flips(flips);
        let ones = self.known.iter().filter(|&&b| b).count();
        self.vote = ones > 2 * self.t;
        self.phase = Phase::Done;
        self.output()
    }

    pub fn output(&self) -> CoolOutput {
        CoolOutput {
            omega: self.omega.clone(),
            vote: self.vote,
            success: self.s,
            s1: self.known.clone(),
        }
    }

    fn match_count(&self) -> usize {
        self.u.iter().filter(|&&b| b).count()
    }

    // Only demotions count once phase 1 is over: a correct process never
    // goes from 0 back to 1.
    fn merge_flips(&mut self, flips: &[Option<bool>]) {
        for j in (0..self.n).filter(|&j| j != self.me) {
            if flips.get(j).copied().flatten() == Some(false) {
                self.known[j] = false;
            }
        }
    }

    fn flip_check(&mut self) -> Option<bool> {
        if !self.s {
            return None;
        }
        for j in 0..self.n {
            if !self.known[j] {
                self.u[j] = false;
            }
        }
        if self.match_count() < self.n - self.t {
            self.s = false;
            self.omega = None;
            self.known[self.me] = false;
            Some(false)
        } else {
            None
        }
    }
}

fn indicator(b: &Body) -> Option<bool> {
    match b {
        Body::Indicator(v) => Some(*v),
        _ => None,
    }
}

/// Four-round driver around [`CoolState`].
#[derive(Clone, Debug)]
pub struct CoolProcess {
    state: CoolState,
    pending: Option<bool>,
    output: Option<CoolOutput>,
}

impl CoolProcess {
    pub fn new(state: CoolState) -> Self {
        CoolProcess {
            state,
            pending: None,
            output: None,
        }
    }

    pub fn state(&self) -> &CoolState {
        &self.state
    }

    pub fn output(&self) -> Option<&CoolOutput> {
        self.output.as_ref()
    }
}

impl RoundMachine for CoolProcess {
    fn rounds(&self) -> u8 {
        4
    }

    fn send(&mut self, step: u8) -> Vec<(usize, Body)> {
        let st = &self.state;
        match step {
            1 => st
                .outgoing_pairs()
                .into_iter()
                .map(|(j, p)| (j, Body::Pair(p)))
                .collect(),
            2..=4 => match self.pending.take() {
                Some(b) => to_others(st.n, st.me, Body::Indicator(b)),
                None => Vec::new(),
            },
            _ => Vec::new(),
        }
    }

    fn deliver(&mut self, step: u8, inbox: &Inbox<'_>) {
        match step {
            1 => {
                let pairs: Vec<Option<&SymbolPair>> = (0..self.state.n)
                    .map(|j| match inbox.get(j) {
                        Some(Body::Pair(p)) => Some(p),
                        _ => None,
                    })
                    .collect();
                self.pending = Some(self.state.phase1(&pairs));
            }
            2 => self.pending = self.state.phase2(&inbox.bits(indicator)),
            3 => self.pending = self.state.phase3(&inbox.bits(indicator)),
            4 => self.output = Some(self.state.conclude(&inbox.bits(indicator))),
            _ => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::Value;

    fn val(b: u8) -> Proposal {
        Proposal::Value(Value::from_bytes(vec![b; 4]))
    }

    fn states(n: usize, t: usize, props: &[Proposal]) -> Vec<CoolState> {
        (0..n)
            .map(|i| CoolState::init(props[i].clone(), n, t, i, 32).unwrap())
            .collect()
    }

    fn pairs_for(states: &[CoolState], me: usize) -> Vec<SymbolPair> {
        states
            .iter()
            .map(|s| SymbolPair {
                for_receiver: s.my_symbol(me).clone(),
                own: s.my_symbol(s.me).clone(),
            })
            .collect()
    }

    #[test]
    fn data_count_formula() {
        assert_eq!(data_count(1), 1);
        assert_eq!(data_count(5), 2);
        assert_eq!(data_count(10), 3);
    }

    #[test]
    fn init_rejects_low_resilience() {
        assert_eq!(
            CoolState::init(val(1), 6, 2, 0, 32).unwrap_err(),
            ProtocolError::Resilience { n: 6, t: 2 }
        );
    }

    #[test]
    fn unanimous_phase1_succeeds() {
        let props = vec![val(1); 4];
        let mut sts = states(4, 1, &props);
        let pairs = pairs_for(&sts, 0);
        let refs: Vec<Option<&SymbolPair>> = pairs.iter().map(Some).collect();
        assert!(sts[0].phase1(&refs));
        assert_eq!(sts[0].matches().iter().filter(|&&b| b).count(), 4);
    }

    #[test]
    fn two_matches_fail_phase1() {
        let props = vec![val(1), val(1), val(2), val(3)];
        let mut sts = states(4, 1, &props);
        let pairs = pairs_for(&sts, 0);
        let refs: Vec<Option<&SymbolPair>> = pairs.iter().map(Some).collect();
        assert!(!sts[0].phase1(&refs));
        assert!(sts[0].omega().is_none());
    }

    #[test]
    fn garbled_pair_is_a_mismatch() {
        let props = vec![val(1); 4];
        let mut sts = states(4, 1, &props);
        let mut pairs = pairs_for(&sts, 0);
        let len = pairs[3].own.len();
        pairs[3].own = Symbol::zero(4, len);
        let refs: Vec<Option<&SymbolPair>> = pairs.iter().map(Some).collect();
        sts[0].phase1(&refs);
        assert!(!sts[0].matches()[3]);
        assert!(sts[0].success());
    }

    #[test]
    fn phase2_flip_after_zeroing() {
        // n=7, t=2: five matches, one matched peer announced 0
        let props = vec![val(1), val(1), val(1), val(1), val(1), val(2), val(3)];
        let mut sts = states(7, 2, &props);
        let pairs = pairs_for(&sts, 0);
        let refs: Vec<Option<&SymbolPair>> = pairs.iter().map(Some).collect();
        assert!(sts[0].phase1(&refs));
        let ind = vec![
            None,
            Some(true),
            Some(true),
            Some(true),
            Some(false),
            Some(false),
            Some(false),
        ];
        assert_eq!(sts[0].phase2(&ind), Some(false));
        assert!(!sts[0].success());
        assert!(sts[0].omega().is_none());
        // already failed: nothing more to do
        assert_eq!(sts[0].phase3(&[None; 7]), None);
    }

    #[test]
    fn phase2_silent_without_new_s0_members() {
        let props = vec![val(1); 4];
        let mut sts = states(4, 1, &props);
        let pairs = pairs_for(&sts, 0);
        let refs: Vec<Option<&SymbolPair>> = pairs.iter().map(Some).collect();
        sts[0].phase1(&refs);
        assert_eq!(
            sts[0].phase2(&[None, Some(true), Some(true), Some(true)]),
            None
        );
        assert!(sts[0].success());
    }

    #[test]
    fn vote_threshold_exactly_2t_plus_1() {
        let props = vec![val(1); 7];
        let mut sts = states(7, 2, &props);
        let pairs = pairs_for(&sts, 0);
        let refs: Vec<Option<&SymbolPair>> = pairs.iter().map(Some).collect();
        sts[0].phase1(&refs);
        // self + four peers = 5 = 2t+1; silent peers fall into S0
        let ind = vec![
            None,
            Some(true),
            Some(true),
            Some(true),
            Some(true),
            None,
            None,
        ];
        assert_eq!(sts[0].phase2(&ind), None);
        assert_eq!(sts[0].phase3(&[None; 7]), None);
        let out = sts[0].conclude(&[None; 7]);
        assert!(out.vote);
        assert_eq!(out.s1_members().count(), 5);

        let mut sts = states(7, 2, &props);
        sts[0].phase1(&refs);
        sts[0].phase2(&ind);
        sts[0].phase3(&[None; 7]);
        let flips = vec![None, Some(false), None, None, None, None, None];
        assert!(!sts[0].conclude(&flips).vote);
    }

    #[test]
    fn late_one_does_not_promote() {
        let props = vec![val(1); 4];
        let mut sts = states(4, 1, &props);
        let pairs = pairs_for(&sts, 0);
        let refs: Vec<Option<&SymbolPair>> = pairs.iter().map(Some).collect();
        sts[0].phase1(&refs);
        sts[0].phase2(&[None, Some(true), Some(true), Some(false)]);
        sts[0].phase3(&[None, None, None, Some(true)]);
        assert!(!sts[0].s1().any(|j| j == 3));
    }
}
