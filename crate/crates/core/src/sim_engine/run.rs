//! Full agreement runs: build the processes, drive them for the scheduled
//! number of rounds, and score the outcome.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::adversary::{CatalogAdversary, FaultPlan, Role};
use super::engine::{Adversary, Engine, EvalOrder, Node};
use super::message::ProcessId;
use super::{derive_seed, SimError};
use crate::ext_protocol::{max_faults, total_rounds, ExtInstance};
use crate::value::{BuiltinValidity, Proposal, ValidityRule, Value};

/// How correct processes' proposals are chosen.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProposalMode {
    /// Everyone proposes the given value, or one sampled value.
    Unanimous(Option<Value>),
    /// Pairwise different valid values.
    Distinct,
    /// Each process picks one of two valid values at random.
    Random { seed: u64 },
}

impl ProposalMode {
    pub fn label(&self) -> &'static str {
        match self {
            ProposalMode::Unanimous(_) => "unanimous",
            ProposalMode::Distinct => "distinct",
            ProposalMode::Random { .. } => "random",
        }
    }

    /// One proposal per process, all valid under `predicate` at `bit_len`.
    pub fn generate(
        &self,
        n: usize,
        predicate: BuiltinValidity,
        bit_len: usize,
        seed: u64,
    ) -> Result<Vec<Value>, SimError> {
        if bit_len < predicate.min_bits() {
            return Err(SimError::Proposals(format!(
                "{} needs values of at least {} bits, got {bit_len}",
                crate::value::Validity::name(&predicate),
                predicate.min_bits()
            )));
        }
        let rule = ValidityRule::new(bit_len, std::sync::Arc::new(predicate));
        match self {
            ProposalMode::Unanimous(Some(v)) => {
                if !rule.accepts(v) {
                    return Err(SimError::Proposals(format!(
                        "unanimous value {v:?} is not valid under {}",
                        rule.predicate_name()
                    )));
                }
                Ok(vec![v.clone(); n])
            }
            ProposalMode::Unanimous(None) => {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[1]));
                Ok(vec![predicate.sample(&mut rng, bit_len); n])
            }
            ProposalMode::Distinct => {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[2]));
                let mut out: Vec<Value> = Vec::with_capacity(n);
                let mut attempts = 0;
                while out.len() < n {
                    let v = predicate.sample(&mut rng, bit_len);
                    if !out.contains(&v) {
                        out.push(v);
                    }
                    attempts += 1;
                    if attempts > 64 * n + 1000 {
                        return Err(SimError::Proposals(format!(
                            "cannot draw {n} distinct valid {bit_len}-bit values"
                        )));
                    }
                }
                Ok(out)
            }
            ProposalMode::Random { seed: mode_seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[3, *mode_seed]));
                let pool = [
                    predicate.sample(&mut rng, bit_len),
                    predicate.sample(&mut rng, bit_len),
                ];
                Ok((0..n).map(|_| pool[rng.gen_range(0..2)].clone()).collect())
            }
        }
    }
}

/// Everything needed to execute one run.
#[derive(Clone, Debug)]
pub struct RunSpec {
    pub n: usize,
    /// Threshold used by the top-level instance; defaults to `⌊(n-1)/3⌋`.
    pub t: Option<usize>,
    pub rule: ValidityRule,
    /// One per process; faulty processes' entries seed their shadows.
    pub proposals: Vec<Value>,
    pub plan: FaultPlan,
    pub order: EvalOrder,
}

impl RunSpec {
    pub fn new(n: usize, rule: ValidityRule, proposals: Vec<Value>, plan: FaultPlan) -> Self {
        RunSpec {
            n,
            t: None,
            rule,
            proposals,
            plan,
            order: EvalOrder::Natural,
        }
    }

    pub fn threshold(&self) -> usize {
        self.t.unwrap_or_else(|| max_faults(self.n))
    }
}

/// Outcome and traffic of one run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunMetrics {
    pub n: usize,
    pub t: usize,
    pub bit_len: usize,
    /// `bits[p][r - 1]`: bits process `p` sent in round `r`; zero rows for
    /// faulty processes.
    pub bits: Vec<Vec<u64>>,
    pub total_bits: u64,
    pub rounds: u32,
    pub decisions: BTreeMap<ProcessId, Proposal>,
    pub decision_rounds: BTreeMap<ProcessId, u32>,
    pub agreement_ok: bool,
    pub termination_ok: bool,
    pub strong_validity_applicable: bool,
    pub strong_validity_ok: bool,
    pub validity_ok: bool,
    pub contract_violated: bool,
    pub decode_failures: u32,
    pub forged_messages: u64,
}

impl RunMetrics {
    /// Any guarantee violated while the run was inside the fault budget.
    pub fn guarantee_violated(&self) -> bool {
        !self.contract_violated
            && !(self.agreement_ok
                && self.termination_ok
                && self.validity_ok
                && self.strong_validity_ok)
    }

    pub fn process_bits(&self, p: usize) -> u64 {
        self.bits[p].iter().sum()
    }

    /// The common decision, when agreement holds.
    pub fn decided_value(&self) -> Option<&Proposal> {
        if self.agreement_ok {
            self.decisions.values().next()
        } else {
            None
        }
    }
}

/// Runs the catalog adversary described by `spec.plan`.
pub fn run(spec: &RunSpec) -> Result<RunMetrics, SimError> {
    let faulty: Vec<ProcessId> = spec.plan.entries().iter().map(|(p, _)| *p).collect();
    let t = spec.t;
    let n = spec.n;
    let alternate = |pid: ProcessId| -> Value {
        let own = &spec.proposals[pid.0];
        (0..n)
            .filter(|q| !spec.plan.is_faulty(ProcessId(*q)))
            .map(|q| &spec.proposals[q])
            .find(|v| *v != own)
            .cloned()
            .unwrap_or_else(|| own.complement())
    };
    check_spec(spec, &faulty)?;
    if let Some(t) = t {
        if n < 3 * t + 1 {
            return Err(crate::error::ProtocolError::Resilience { n, t }.into());
        }
    }
    let adversary = CatalogAdversary::new(&spec.plan, |pid, role| {
        let v = match role {
            Role::Primary => spec.proposals[pid.0].clone(),
            Role::Alternate => alternate(pid),
        };
        ExtInstance::root(n, pid.0, Proposal::Value(v), t, spec.rule.clone())
            .expect("spec already validated")
    });
    run_with_adversary(spec, &faulty, adversary)
}

fn check_spec(spec: &RunSpec, faulty: &[ProcessId]) -> Result<(), SimError> {
    if spec.n == 0 {
        return Err(crate::error::ProtocolError::Resilience { n: 0, t: 0 }.into());
    }
    if spec.proposals.len() != spec.n {
        return Err(SimError::ProposalCount {
            expected: spec.n,
            got: spec.proposals.len(),
        });
    }
    if let Some(p) = faulty.iter().find(|p| p.0 >= spec.n) {
        return Err(SimError::UnknownProcess(*p));
    }
    Ok(())
}

/// Runs with an arbitrary adversary controlling the processes in `faulty`.
pub fn run_with_adversary<A: Adversary>(
    spec: &RunSpec,
    faulty: &[ProcessId],
    adversary: A,
) -> Result<RunMetrics, SimError> {
    check_spec(spec, faulty)?;
    let n = spec.n;
    let t = spec.threshold();
    let mut nodes = Vec::with_capacity(n);
    for p in (0..n).filter(|p| !faulty.contains(&ProcessId(*p))) {
        let prop = Proposal::Value(spec.proposals[p].clone());
        nodes.push(ExtInstance::root(n, p, prop, spec.t, spec.rule.clone())?);
    }
    let rounds = total_rounds(n);
    let mut engine = Engine::new(n, nodes, adversary).with_order(spec.order.clone());
    engine.run(rounds);
    let (nodes, _, traffic) = engine.into_parts();

    let mut decisions = BTreeMap::new();
    let mut decision_rounds = BTreeMap::new();
    let mut decode_failures = 0;
    for node in &nodes {
        decode_failures += node.decode_failures();
        if let (Some(d), Some(r)) = (node.decision(), node.decided_round()) {
            let pid = Node::id(node);
            decisions.insert(pid, d.clone());
            decision_rounds.insert(pid, r);
        }
    }

    let correct: Vec<usize> = (0..n)
        .filter(|p| !faulty.contains(&ProcessId(*p)))
        .collect();
    let termination_ok = correct
        .iter()
        .all(|p| decision_rounds.get(&ProcessId(*p)) == Some(&rounds));
    let first = decisions.values().next();
    let agreement_ok = termination_ok && decisions.values().all(|d| Some(d) == first);
    let validity_ok = decisions.values().all(|d| spec.rule.accepts_proposal(d));
    let unanimous = correct
        .windows(2)
        .all(|w| spec.proposals[w[0]] == spec.proposals[w[1]]);
    let strong_validity_applicable = unanimous && !correct.is_empty();
    let strong_validity_ok = !strong_validity_applicable || {
        let w = Proposal::Value(spec.proposals[correct[0]].clone());
        termination_ok && decisions.values().all(|d| *d == w)
    };
    let proposals_valid = correct
        .iter()
        .all(|p| spec.rule.accepts(&spec.proposals[*p]));
    let contract_violated = faulty.len() > t || 3 * faulty.len() >= n || !proposals_valid;

    Ok(RunMetrics {
        n,
        t,
        bit_len: spec.rule.bit_len(),
        total_bits: traffic.total(),
        bits: traffic.bits,
        rounds,
        decisions,
        decision_rounds,
        agreement_ok,
        termination_ok,
        strong_validity_applicable,
        strong_validity_ok,
        validity_ok,
        contract_violated,
        decode_failures,
        forged_messages: traffic.forged,
    })
}
