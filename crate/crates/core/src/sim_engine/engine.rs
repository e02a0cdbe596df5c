//! Generic lock-step delivery loop.
//!
//! Each round: every correct node emits its messages; the adversary sees
//! all of them (rushing) and answers on behalf of the faulty processes; then
//! every node receives its inbox sorted by sender.

use log::warn;

use super::message::{ProcessId, RoundMessage};

/// A correct process as seen by the engine.
pub trait Node {
    fn id(&self) -> ProcessId;

    /// Messages for round `round` (1-based).
    fn send(&mut self, round: u32) -> Vec<RoundMessage>;

    /// Everything addressed to this node in round `round`, sorted by sender.
    fn deliver(&mut self, round: u32, inbox: &[RoundMessage]);
}

/// Controls every faulty process at once.
pub trait Adversary {
    /// Faulty messages for `round`, chosen after seeing every correct
    /// message of the same round.
    fn act(&mut self, round: u32, correct: &[RoundMessage]) -> Vec<RoundMessage>;

    /// Messages delivered to faulty processes at the end of `round`.
    fn observe(&mut self, _round: u32, _delivered: &[RoundMessage]) {}
}

/// An adversary whose processes never send anything.
#[derive(Clone, Copy, Debug, Default)]
pub struct Passive;

impl Adversary for Passive {
    fn act(&mut self, _round: u32, _correct: &[RoundMessage]) -> Vec<RoundMessage> {
        Vec::new()
    }
}

/// Order in which nodes are stepped inside a round. The outcome must not
/// depend on it.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum EvalOrder {
    #[default]
    Natural,
    Reversed,
    Permuted(Vec<usize>),
}

impl EvalOrder {
    fn indices(&self, len: usize) -> Vec<usize> {
        match self {
            EvalOrder::Natural => (0..len).collect(),
            EvalOrder::Reversed => (0..len).rev().collect(),
            EvalOrder::Permuted(p) => {
                assert_eq!(p.len(), len, "permutation must cover every node");
                p.clone()
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Traffic {
    /// `bits[process][round - 1]`, correct senders only.
    pub bits: Vec<Vec<u64>>,
    /// Adversary messages rejected for claiming a correct sender.
    pub forged: u64,
}

impl Traffic {
    pub fn total(&self) -> u64 {
        self.bits.iter().flatten().sum()
    }

    pub fn process_total(&self, p: usize) -> u64 {
        self.bits[p].iter().sum()
    }
}

pub struct Engine<N, A> {
    n: usize,
    nodes: Vec<N>,
    faulty: Vec<bool>,
    adversary: A,
    order: EvalOrder,
    traffic: Traffic,
    round: u32,
}

impl<N: Node, A: Adversary> Engine<N, A> {
    /// `nodes` are the correct processes; every other id in `0..n` is
    /// controlled by `adversary`.
    pub fn new(n: usize, nodes: Vec<N>, adversary: A) -> Self {
        let mut faulty = vec![true; n];
        for node in &nodes {
            faulty[node.id().0] = false;
        }
        Engine {
            n,
            nodes,
            faulty,
            adversary,
            order: EvalOrder::Natural,
            traffic: Traffic {
                bits: vec![Vec::new(); n],
                forged: 0,
            },
            round: 0,
        }
    }

    pub fn with_order(mut self, order: EvalOrder) -> Self {
        self.order = order;
        self
    }

    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn nodes(&self) -> &[N] {
        &self.nodes
    }

    pub fn traffic(&self) -> &Traffic {
        &self.traffic
    }

    pub fn adversary(&self) -> &A {
        &self.adversary
    }

    pub fn into_parts(self) -> (Vec<N>, A, Traffic) {
        (self.nodes, self.adversary, self.traffic)
    }

    pub fn run(&mut self, rounds: u32) {
        for _ in 0..rounds {
            self.step();
        }
    }

    /// Executes one round.
    pub fn step(&mut self) {
        self.round += 1;
        let round = self.round;
        let order = self.order.indices(self.nodes.len());

        let mut outgoing: Vec<Vec<RoundMessage>> = vec![Vec::new(); self.nodes.len()];
        for &i in &order {
            outgoing[i] = self.nodes[i].send(round);
        }
        let correct: Vec<RoundMessage> = outgoing.into_iter().flatten().collect();
        for b in &mut self.traffic.bits {
            b.push(0);
        }
        for m in &correct {
            self.traffic.bits[m.sender.0][round as usize - 1] += m.bit_size();
        }

        let mut forged = 0u64;
        let faulty = &self.faulty;
        let n = self.n;
        let injected: Vec<RoundMessage> = self
            .adversary
            .act(round, &correct)
            .into_iter()
            .filter(|m| {
                let ok = m.sender.0 < n && faulty[m.sender.0] && m.receiver.0 < n;
                forged += !ok as u64;
                ok
            })
            .collect();
        if forged > 0 {
            warn!("round {round}: rejected {forged} adversary messages with a correct sender");
            self.traffic.forged += forged;
        }

        let mut inboxes: Vec<Vec<RoundMessage>> = vec![Vec::new(); self.n];
        for m in correct.into_iter().chain(injected) {
            inboxes[m.receiver.0].push(m);
        }
        for inbox in &mut inboxes {
            inbox.sort_by_key(|m| m.sender);
        }
        let to_faulty: Vec<RoundMessage> = inboxes
            .iter()
            .enumerate()
            .filter(|(p, _)| self.faulty[*p])
            .flat_map(|(_, ib)| ib.iter().cloned())
            .collect();
        self.adversary.observe(round, &to_faulty);
        for &i in &order {
            let id = self.nodes[i].id().0;
            self.nodes[i].deliver(round, &inboxes[id]);
        }
    }
}
