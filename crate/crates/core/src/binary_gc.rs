//! One-bit graded consensus: a two-round echo-threshold construction.
//!
//! Round 1 broadcasts the proposed bit. A process that saw some bit at least
//! `n - t` times echoes it in round 2. `n - t` echoes of `b` grade it 1;
//! `t + 1` echoes grade it 0; otherwise the process keeps its own bit at
//! grade 0. With `t < n/3` no two correct processes echo different bits, and
//! every decided bit was proposed by a correct process.

use crate::sim_engine::message::{broadcast, Body, Inbox, RoundMachine};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Grade {
    Zero,
    One,
}

impl Grade {
    pub fn as_u8(self) -> u8 {
        match self {
            Grade::Zero => 0,
            Grade::One => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BitGradedDecision {
    pub bit: bool,
    pub grade: Grade,
}

/// Round-1 payload: the proposal itself.
pub fn bgc_round_1(my_bit: bool) -> bool {
    my_bit
}

fn counts(bits: impl IntoIterator<Item = bool>) -> [usize; 2] {
    let mut c = [0usize; 2];
    for b in bits {
        c[b as usize] += 1;
    }
    c
}

/// Round-2 echo, if some bit reached `n - t` round-1 copies.
pub fn bgc_round_2(n: usize, t: usize, inbox: impl IntoIterator<Item = bool>) -> Option<bool> {
    let c = counts(inbox);
    let quorum = n - t;
    match (c[0] >= quorum, c[1] >= quorum) {
        (false, false) => None,
        (true, false) => Some(false),
        (false, true) => Some(true),
        // only reachable with t >= n/2
        (true, true) => Some(c[1] > c[0]),
    }
}

/// Decision from the round-2 echoes.
pub fn bgc_decide(
    n: usize,
    t: usize,
    my_bit: bool,
    echoes: impl IntoIterator<Item = bool>,
) -> BitGradedDecision {
    let c = counts(echoes);
    let pick = |threshold: usize| -> Option<bool> {
        match (c[0] >= threshold, c[1] >= threshold) {
            (false, false) => None,
            (true, false) => Some(false),
            (false, true) => Some(true),
            (true, true) if c[0] == c[1] => Some(my_bit),
            (true, true) => Some(c[1] > c[0]),
        }
    };
    if let Some(bit) = pick(n - t) {
        return BitGradedDecision {
            bit,
            grade: Grade::One,
        };
    }
    let bit = pick(t + 1).unwrap_or(my_bit);
    BitGradedDecision {
        bit,
        grade: Grade::Zero,
    }
}

/// Per-process driver for the two rounds.
#[derive(Clone, Debug)]
pub struct BgcProcess {
    n: usize,
    t: usize,
    my_bit: bool,
    echo: Option<bool>,
    decision: Option<BitGradedDecision>,
}

impl BgcProcess {
    pub fn new(n: usize, t: usize, my_bit: bool) -> Self {
        BgcProcess {
            n,
            t,
            my_bit,
            echo: None,
            decision: None,
        }
    }

    pub fn decision(&self) -> Option<BitGradedDecision> {
        self.decision
    }

    pub fn echoed(&self) -> Option<bool> {
        self.echo
    }
}

impl RoundMachine for BgcProcess {
    fn rounds(&self) -> u8 {
        2
    }

    fn send(&mut self, step: u8) -> Vec<(usize, Body)> {
        match step {
            1 => broadcast(self.n, Body::Vote(bgc_round_1(self.my_bit))),
            2 => match self.echo {
                Some(b) => broadcast(self.n, Body::Echo(b)),
                None => Vec::new(),
            },
            _ => Vec::new(),
        }
    }

    fn deliver(&mut self, step: u8, inbox: &Inbox<'_>) {
        match step {
            1 => {
                let votes = inbox.iter().filter_map(|(_, b)| match b {
                    Body::Vote(v) => Some(*v),
                    _ => None,
                });
                self.echo = bgc_round_2(self.n, self.t, votes);
            }
            2 => {
                let echoes = inbox.iter().filter_map(|(_, b)| match b {
                    Body::Echo(v) => Some(*v),
                    _ => None,
                });
                self.decision = Some(bgc_decide(self.n, self.t, self.my_bit, echoes));
            }
            _ => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    #[test]
    fn round_one_is_identity() {
        assert!(bgc_round_1(true));
        assert!(!bgc_round_1(false));
    }

    #[test]
    fn echo_thresholds() {
        assert_eq!(bgc_round_2(4, 1, bits("1110")), Some(true));
        assert_eq!(bgc_round_2(4, 1, bits("1100")), None);
        assert_eq!(bgc_round_2(7, 2, bits("00000")), Some(false));
        assert_eq!(bgc_round_2(7, 2, bits("0000111")), None);
    }

    #[test]
    fn decide_thresholds() {
        let d = bgc_decide(4, 1, false, bits("111"));
        assert_eq!((d.bit, d.grade), (true, Grade::One));
        let d = bgc_decide(4, 1, false, bits("11"));
        assert_eq!((d.bit, d.grade), (true, Grade::Zero));
        let d = bgc_decide(4, 1, false, bits("10"));
        assert_eq!((d.bit, d.grade), (false, Grade::Zero));
        let d = bgc_decide(4, 1, true, bits(""));
        assert_eq!((d.bit, d.grade), (true, Grade::Zero));
    }

    #[test]
    fn unanimous_inbox_holds_n_copies() {
        let n = 4;
        let mut procs: Vec<BgcProcess> = (0..n).map(|_| BgcProcess::new(n, 1, true)).collect();
        let sent: Vec<Vec<(usize, Body)>> = procs.iter_mut().map(|p| p.send(1)).collect();
        for r in 0..n {
            let entries = sent.iter().enumerate().flat_map(|(s, out)| {
                out.iter()
                    .filter(|(to, _)| *to == r)
                    .map(move |(_, b)| (s, b))
            });
            let inbox = Inbox::from_entries(n, entries);
            let ones = inbox
                .iter()
                .filter(|(_, b)| **b == Body::Vote(true))
                .count();
            assert_eq!(ones, 4);
        }
    }
}
