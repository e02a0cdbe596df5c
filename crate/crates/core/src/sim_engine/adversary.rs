//! Fault plans and the catalog of seeded Byzantine strategies.
//!
//! Every strategy except `Silent` runs honest "shadow" copies of the
//! protocol on the faulty process's behalf and distorts what they emit, so
//! faulty traffic stays well-tagged and hard to filter out.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::derive_seed;
use super::engine::{Adversary, Node};
use super::message::{Body, ProcessId, RoundMessage, Tag};
use crate::gf_rs::{Gf16, Symbol};
use crate::reduce_cool::SymbolPair;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Never sends.
    Silent,
    /// Honest before `round`, silent from `round` on.
    Crash { round: u32 },
    /// Two honest shadows with different proposals; each receiver gets one
    /// of them, re-chosen every round.
    Equivocate { seed: u64 },
    /// Honest shadow whose symbols are replaced by random elements.
    GarbageSymbols { seed: u64 },
    /// Honest shadow with random indicator, vote and echo bits, plus
    /// unsolicited random bits wherever correct processes send bits.
    IndicatorLiar { seed: u64 },
    /// Honest shadow running with a competing proposal, the same one
    /// towards every receiver.
    Impostor,
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Silent => "silent",
            Strategy::Crash { .. } => "crash",
            Strategy::Equivocate { .. } => "equivocate",
            Strategy::GarbageSymbols { .. } => "garbage",
            Strategy::IndicatorLiar { .. } => "indicator-liar",
            Strategy::Impostor => "impostor",
        }
    }

    fn seed(&self) -> u64 {
        match *self {
            Strategy::Silent | Strategy::Impostor => 0,
            Strategy::Crash { round } => round as u64,
            Strategy::Equivocate { seed }
            | Strategy::GarbageSymbols { seed }
            | Strategy::IndicatorLiar { seed } => seed,
        }
    }

    /// Number of shadows the strategy drives.
    pub fn shadows(&self) -> usize {
        self.roles().len()
    }

    fn roles(&self) -> &'static [Role] {
        match self {
            Strategy::Silent => &[],
            Strategy::Equivocate { .. } => &[Role::Primary, Role::Alternate],
            Strategy::Impostor => &[Role::Alternate],
            _ => &[Role::Primary],
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Crash { round } => write!(f, "crash:{round}"),
            s => f.write_str(s.name()),
        }
    }
}

/// Static assignment of strategies to faulty processes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FaultPlan {
    faulty: Vec<(ProcessId, Strategy)>,
    seed: u64,
}

impl FaultPlan {
    pub fn none() -> Self {
        FaultPlan::default()
    }

    /// Later entries for an already listed process are ignored.
    pub fn new(entries: impl IntoIterator<Item = (ProcessId, Strategy)>, seed: u64) -> Self {
        let mut faulty: Vec<(ProcessId, Strategy)> = Vec::new();
        for (p, s) in entries {
            if !faulty.iter().any(|(q, _)| *q == p) {
                faulty.push((p, s));
            }
        }
        faulty.sort_by_key(|(p, _)| *p);
        FaultPlan { faulty, seed }
    }

    /// `count` processes per strategy, placed uniformly at random among
    /// `0..n` using `seed`.
    pub fn placed(n: usize, specs: &[(Strategy, usize)], seed: u64) -> Self {
        let total: usize = specs.iter().map(|(_, c)| c).sum();
        assert!(total <= n, "more faulty processes than processes");
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0xFA17]));
        let ids = sample(&mut rng, n, total).into_vec();
        let strategies = specs.iter().flat_map(|(s, c)| std::iter::repeat_n(*s, *c));
        FaultPlan::new(ids.into_iter().map(ProcessId).zip(strategies), seed)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.faulty.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faulty.is_empty()
    }

    pub fn entries(&self) -> &[(ProcessId, Strategy)] {
        &self.faulty
    }

    pub fn is_faulty(&self, p: ProcessId) -> bool {
        self.faulty.iter().any(|(q, _)| *q == p)
    }

    /// Compact description such as `crash:5@1+silent@2`, or `none`.
    pub fn label(&self) -> String {
        if self.faulty.is_empty() {
            return "none".into();
        }
        let mut counts: Vec<(String, usize)> = Vec::new();
        for (_, s) in &self.faulty {
            let key = s.to_string();
            match counts.iter_mut().find(|(k, _)| *k == key) {
                Some((_, c)) => *c += 1,
                None => counts.push((key, 1)),
            }
        }
        counts.sort();
        counts
            .into_iter()
            .map(|(k, c)| format!("{k}@{c}"))
            .collect::<Vec<_>>()
            .join("+")
    }
}

/// Which proposal a shadow should run with.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    /// The faulty process's own proposal.
    Primary,
    /// A competing proposal, for equivocation.
    Alternate,
}

struct Faulty<N> {
    pid: ProcessId,
    strategy: Strategy,
    rng: ChaCha8Rng,
    shadows: Vec<N>,
}

/// Drives every faulty process of a [`FaultPlan`].
pub struct CatalogAdversary<N> {
    procs: Vec<Faulty<N>>,
}

impl<N: Node> CatalogAdversary<N> {
    pub fn new(plan: &FaultPlan, mut make: impl FnMut(ProcessId, Role) -> N) -> Self {
        let procs = plan
            .entries()
            .iter()
            .map(|&(pid, strategy)| {
                let shadows = strategy.roles().iter().map(|&r| make(pid, r)).collect();
                let seed = derive_seed(plan.seed(), &[pid.0 as u64, strategy.seed()]);
                Faulty {
                    pid,
                    strategy,
                    rng: ChaCha8Rng::seed_from_u64(seed),
                    shadows,
                }
            })
            .collect();
        CatalogAdversary { procs }
    }
}

fn random_symbol(rng: &mut ChaCha8Rng, s: &Symbol) -> Symbol {
    Symbol::new(s.index(), (0..s.len()).map(|_| Gf16(rng.gen())).collect())
}

fn garble(rng: &mut ChaCha8Rng, body: Body) -> Body {
    match body {
        Body::Pair(p) => Body::Pair(SymbolPair {
            for_receiver: random_symbol(rng, &p.for_receiver),
            own: random_symbol(rng, &p.own),
        }),
        Body::Help(s) => Body::Help(random_symbol(rng, &s)),
        Body::Share(s) => Body::Share(random_symbol(rng, &s)),
        Body::Reconstruct(s) => Body::Reconstruct(random_symbol(rng, &s)),
        other => other,
    }
}

fn flip_coin(rng: &mut ChaCha8Rng, body: &Body) -> Option<Body> {
    match body {
        Body::Indicator(_) => Some(Body::Indicator(rng.gen())),
        Body::Vote(_) => Some(Body::Vote(rng.gen())),
        Body::Echo(_) => Some(Body::Echo(rng.gen())),
        _ => None,
    }
}

impl<N: Node> Faulty<N> {
    fn act(&mut self, round: u32, correct: &[RoundMessage]) -> Vec<RoundMessage> {
        match self.strategy {
            Strategy::Silent => Vec::new(),
            Strategy::Impostor => self.shadows[0].send(round),
            Strategy::Crash { round: at } => {
                if round < at {
                    self.shadows[0].send(round)
                } else {
                    Vec::new()
                }
            }
            Strategy::Equivocate { .. } => {
                let mut by_receiver: BTreeMap<ProcessId, [Vec<RoundMessage>; 2]> = BTreeMap::new();
                for (i, shadow) in self.shadows.iter_mut().enumerate() {
                    for m in shadow.send(round) {
                        by_receiver.entry(m.receiver).or_default()[i].push(m);
                    }
                }
                let rng = &mut self.rng;
                by_receiver
                    .into_values()
                    .flat_map(|[a, b]| if rng.gen() { a } else { b })
                    .collect()
            }
            Strategy::GarbageSymbols { .. } => {
                let rng = &mut self.rng;
                self.shadows[0]
                    .send(round)
                    .into_iter()
                    .map(|m| RoundMessage {
                        body: garble(rng, m.body),
                        ..m
                    })
                    .collect()
            }
            Strategy::IndicatorLiar { .. } => {
                let rng = &mut self.rng;
                let mut seen: HashSet<(ProcessId, Tag)> = HashSet::new();
                let mut out = Vec::new();
                for m in self.shadows[0].send(round) {
                    seen.insert((m.receiver, m.tag));
                    let body = flip_coin(rng, &m.body).unwrap_or(m.body);
                    out.push(RoundMessage { body, ..m });
                }
                for m in correct {
                    if let Some(body) = flip_coin(rng, &m.body) {
                        if seen.insert((m.receiver, m.tag)) {
                            out.push(RoundMessage {
                                sender: self.pid,
                                receiver: m.receiver,
                                tag: m.tag,
                                body,
                            });
                        }
                    }
                }
                out
            }
        }
    }

    fn observe(&mut self, round: u32, delivered: &[RoundMessage]) {
        if self.shadows.is_empty() {
            return;
        }
        if let Strategy::Crash { round: at } = self.strategy {
            if round >= at {
                return;
            }
        }
        let mine: Vec<RoundMessage> = delivered
            .iter()
            .filter(|m| m.receiver == self.pid)
            .cloned()
            .collect();
        for s in &mut self.shadows {
            s.deliver(round, &mine);
        }
    }
}

impl<N: Node> Adversary for CatalogAdversary<N> {
    fn act(&mut self, round: u32, correct: &[RoundMessage]) -> Vec<RoundMessage> {
        self.procs
            .iter_mut()
            .flat_map(|p| p.act(round, correct))
            .collect()
    }

    fn observe(&mut self, round: u32, delivered: &[RoundMessage]) {
        for p in &mut self.procs {
            p.observe(round, delivered);
        }
    }
}

/// Adversary defined by a closure, for hand-scripted attacks.
pub struct Scripted<F>(pub F);

impl<F> Adversary for Scripted<F>
where
    F: FnMut(u32, &[RoundMessage]) -> Vec<RoundMessage>,
{
    fn act(&mut self, round: u32, correct: &[RoundMessage]) -> Vec<RoundMessage> {
        (self.0)(round, correct)
    }
}
