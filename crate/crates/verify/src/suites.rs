//! Randomized and exhaustive property suites over the protocol layers.

use std::collections::{BTreeMap, HashMap};

use itertools::Itertools;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use extba::binary_gc::Grade;
use extba::coding::encode_proposal;
use extba::committee_dissemination::{CdProcess, CommitteeConfig, CD_ROUNDS};
use extba::ext_protocol::max_faults;
use extba::gf_rs::{self, Gf16, Symbol};
use extba::graded_consensus::{GcProcess, GC_ROUNDS};
use extba::reduce_cool::{data_count, CoolProcess, CoolState, SymbolPair};
use extba::sim_engine::message::{Body, ProcessId, RoundMachine, RoundMessage, Tag};
use extba::sim_engine::solo::Solo;
use extba::sim_engine::sweep::Scenario;
use extba::sim_engine::{
    Adversary, CatalogAdversary, Engine, FaultPlan, ProposalMode, Role, Strategy, Traffic,
};
use extba::{BuiltinValidity, Proposal, Value};

use crate::report::SuiteReport;
use crate::{ref_gf, ref_rs};

fn random_strategy(rng: &mut ChaCha8Rng, rounds: u32) -> Strategy {
    let seed = rng.gen();
    match rng.gen_range(0..6) {
        0 => Strategy::Silent,
        1 => Strategy::Crash {
            round: rng.gen_range(1..=rounds.max(1)),
        },
        2 => Strategy::Equivocate { seed },
        3 => Strategy::GarbageSymbols { seed },
        4 => Strategy::Impostor,
        _ => Strategy::IndicatorLiar { seed },
    }
}

fn drive<M: RoundMachine, A: Adversary>(
    n: usize,
    nodes: Vec<Solo<M>>,
    adversary: A,
    rounds: u8,
) -> (Vec<Solo<M>>, Traffic) {
    let mut engine = Engine::new(n, nodes, adversary);
    engine.run(rounds as u32);
    let (nodes, _, traffic) = engine.into_parts();
    (nodes, traffic)
}

/// Faulty processes that answer every correct process as if they held
/// that process's own value, and claim success.
struct SupportAll {
    n: usize,
    k: usize,
    capacity: usize,
    faulty: Vec<usize>,
    values: BTreeMap<usize, Proposal>,
}

impl Adversary for SupportAll {
    fn act(&mut self, round: u32, _correct: &[RoundMessage]) -> Vec<RoundMessage> {
        let tag = Tag::standalone(self.n, round as u8);
        let mut codes: HashMap<&Proposal, Vec<Symbol>> = HashMap::new();
        let mut out = Vec::new();
        for &f in &self.faulty {
            for (&j, w) in &self.values {
                let body = match round {
                    1 => {
                        let cw = codes.entry(w).or_insert_with(|| {
                            encode_proposal(w, self.capacity, self.n, self.k)
                                .expect("valid parameters")
                                .into_symbols()
                        });
                        Body::Pair(SymbolPair {
                            for_receiver: cw[j].clone(),
                            own: cw[f].clone(),
                        })
                    }
                    2 => Body::Indicator(true),
                    _ => continue,
                };
                out.push(RoundMessage {
                    sender: ProcessId(f),
                    receiver: ProcessId(j),
                    tag,
                    body,
                });
            }
        }
        out
    }
}

const COOL_BITS: usize = 64;

struct Setup {
    n: usize,
    t: usize,
    faulty: Vec<usize>,
    values: Vec<Proposal>,
    unanimous: bool,
    strategies: Vec<(ProcessId, Strategy)>,
    support_all: bool,
}

fn random_setup(n: usize, seed: u64, rounds: u32) -> Setup {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = max_faults(n);
    let f = if rng.gen_bool(0.2) {
        rng.gen_range(0..=t)
    } else {
        t
    };
    let faulty = sample(&mut rng, n, f).into_vec();
    let a = Proposal::Value(Value::random(&mut rng, COOL_BITS));
    let b = Proposal::Value(Value::random(&mut rng, COOL_BITS));
    let unanimous = rng.gen_bool(0.25);
    let p_a = [0.5, 0.7, 0.85][rng.gen_range(0..3)];
    let values = (0..n)
        .map(|_| {
            if unanimous || rng.gen_bool(p_a) {
                a.clone()
            } else {
                b.clone()
            }
        })
        .collect();
    let strategies = faulty
        .iter()
        .map(|&p| (ProcessId(p), random_strategy(&mut rng, rounds)))
        .collect();
    Setup {
        n,
        t,
        faulty,
        values,
        unanimous,
        strategies,
        support_all: rng.gen_bool(0.3),
    }
}

impl Setup {
    fn correct(&self) -> Vec<usize> {
        (0..self.n).filter(|p| !self.faulty.contains(p)).collect()
    }

    fn alternate(&self, p: usize) -> Proposal {
        let own = &self.values[p];
        self.correct()
            .into_iter()
            .map(|q| self.values[q].clone())
            .find(|v| v != own)
            .unwrap_or_else(|| match own {
                Proposal::Value(v) => Proposal::Value(v.complement()),
                Proposal::Bottom => Proposal::Bottom,
            })
    }

    fn support_all(&self) -> SupportAll {
        SupportAll {
            n: self.n,
            k: data_count(self.t),
            capacity: COOL_BITS,
            faulty: self.faulty.clone(),
            values: self
                .correct()
                .into_iter()
                .map(|j| (j, self.values[j].clone()))
                .collect(),
        }
    }

    fn describe(&self, seed: u64) -> String {
        format!(
            "seed={seed} n={} faulty={:?} support_all={} strategies={:?}",
            self.n, self.faulty, self.support_all, self.strategies
        )
    }
}

fn cool_node(n: usize, t: usize, p: usize, v: Proposal) -> Solo<CoolProcess> {
    let state = CoolState::init(v, n, t, p, COOL_BITS).expect("n >= 3t + 1");
    Solo::new(p, n, CoolProcess::new(state))
}

/// Non-duplicity, retrievability, obligation and safety of Reduce-COOL.
pub fn cool_properties(n: usize, seeds: std::ops::Range<u64>) -> SuiteReport {
    let mut report = SuiteReport::new(format!("reduce-cool properties n={n}"));
    for seed in seeds {
        report.case();
        let s = random_setup(n, seed, 4);
        let correct = s.correct();
        let nodes: Vec<Solo<CoolProcess>> = correct
            .iter()
            .map(|&p| cool_node(n, s.t, p, s.values[p].clone()))
            .collect();
        let outs = if s.support_all {
            drive(n, nodes, s.support_all(), 4).0
        } else {
            let plan = FaultPlan::new(s.strategies.clone(), seed);
            let adv = CatalogAdversary::new(&plan, |pid, role| {
                let v = match role {
                    Role::Primary => s.values[pid.0].clone(),
                    Role::Alternate => s.alternate(pid.0),
                };
                cool_node(n, s.t, pid.0, v)
            });
            drive(n, nodes, adv, 4).0
        };
        let outs: Vec<_> = outs
            .iter()
            .map(|node| node.machine().output().cloned().expect("four rounds ran"))
            .collect();
        let ctx = s.describe(seed);
        let omega_of: BTreeMap<usize, Option<&Proposal>> = correct
            .iter()
            .zip(&outs)
            .map(|(&p, o)| (p, o.omega.as_ref()))
            .collect();

        for (&p, o) in correct.iter().zip(&outs) {
            report.check(o.omega.as_ref().is_none_or(|w| *w == s.values[p]), || {
                format!("{ctx}: p{p} kept a value it did not propose")
            });
            report.check(o.success == o.omega.is_some(), || {
                format!("{ctx}: p{p} success flag out of step with its value")
            });
        }
        if outs.iter().any(|o| o.vote) {
            let surviving = omega_of.values().flatten().unique().count();
            report.check(surviving <= 1, || {
                format!("{ctx}: {surviving} distinct values survive with a positive vote")
            });
        }
        for (&p, o) in correct.iter().zip(&outs) {
            if o.vote {
                let backed = o
                    .s1_members()
                    .filter(|j| omega_of.get(j).is_some_and(|w| w.is_some()))
                    .count();
                report.check(backed > s.t, || {
                    format!("{ctx}: p{p} voted 1 with only {backed} correct holders in S1")
                });
            }
        }
        if s.unanimous {
            let w = &s.values[correct[0]];
            for (&p, o) in correct.iter().zip(&outs) {
                report.check(o.vote && o.success && o.omega.as_ref() == Some(w), || {
                    format!("{ctx}: p{p} lost the unanimous value")
                });
            }
        }
    }
    report
}

fn gc_node(n: usize, t: usize, p: usize, v: Proposal) -> Solo<GcProcess> {
    Solo::new(
        p,
        n,
        GcProcess::new(v, n, t, p, COOL_BITS).expect("n >= 3t + 1"),
    )
}

/// Strong validity, consistency, termination and provenance of graded
/// consensus under the fault catalog and the support-all attack.
pub fn gc_properties(n: usize, seeds: std::ops::Range<u64>) -> SuiteReport {
    let mut report = SuiteReport::new(format!("graded consensus n={n}"));
    for seed in seeds {
        report.case();
        let s = random_setup(n, seed, GC_ROUNDS as u32);
        let correct = s.correct();
        let nodes: Vec<Solo<GcProcess>> = correct
            .iter()
            .map(|&p| gc_node(n, s.t, p, s.values[p].clone()))
            .collect();
        let outs = if s.support_all {
            drive(n, nodes, s.support_all(), GC_ROUNDS).0
        } else {
            let plan = FaultPlan::new(s.strategies.clone(), seed);
            let adv = CatalogAdversary::new(&plan, |pid, role| {
                let v = match role {
                    Role::Primary => s.values[pid.0].clone(),
                    Role::Alternate => s.alternate(pid.0),
                };
                gc_node(n, s.t, pid.0, v)
            });
            drive(n, nodes, adv, GC_ROUNDS).0
        };
        let ctx = s.describe(seed);
        let decisions: Vec<_> = outs
            .iter()
            .map(|node| node.machine().decision().cloned())
            .collect();
        report.check(decisions.iter().all(Option::is_some), || {
            format!("{ctx}: undecided")
        });
        let decisions: Vec<_> = decisions.into_iter().flatten().collect();
        for d in &decisions {
            report.check(correct.iter().any(|&p| s.values[p] == d.value), || {
                format!(
                    "{ctx}: decided {:?}, proposed by no correct process",
                    d.value
                )
            });
        }
        if let Some(g1) = decisions.iter().find(|d| d.grade == Grade::One) {
            report.check(decisions.iter().all(|d| d.value == g1.value), || {
                format!("{ctx}: grade-1 decision not shared")
            });
        }
        if s.unanimous {
            let w = &s.values[correct[0]];
            report.check(
                decisions
                    .iter()
                    .all(|d| d.value == *w && d.grade == Grade::One),
                || format!("{ctx}: strong validity"),
            );
        }
        report.check(outs.iter().all(|o| !o.machine().decode_failed()), || {
            format!("{ctx}: reconstruction decode failed")
        });
    }
    report
}

/// Per-process bits of one fault-free graded consensus instance.
pub fn gc_bits(n: usize, bit_len: usize, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = max_faults(n);
    let w = Proposal::Value(Value::random(&mut rng, bit_len));
    let nodes: Vec<Solo<GcProcess>> = (0..n)
        .map(|p| {
            Solo::new(
                p,
                n,
                GcProcess::new(w.clone(), n, t, p, bit_len).expect("n >= 3t + 1"),
            )
        })
        .collect();
    let (_, traffic) = drive(n, nodes, extba::sim_engine::Passive, GC_ROUNDS);
    (0..n).map(|p| traffic.process_total(p)).collect()
}

/// Every fault count up to `y'` in the committee, both halves as the
/// committee, the strategy catalog, and the non-committee silence check.
pub fn cd_suite(x: usize, seeds_per_case: u64) -> SuiteReport {
    let mut report = SuiteReport::new(format!("committee dissemination x={x}"));
    let bits = 96;
    for (start, len) in [(0, x.div_ceil(2)), (x.div_ceil(2), x / 2)] {
        let cfg = CommitteeConfig::new(x, start, len).expect("half-sized committee");
        for f in 0..=cfg.y_prime() {
            for seed in 0..seeds_per_case {
                report.case();
                let mut rng = ChaCha8Rng::seed_from_u64(
                    seed ^ ((x as u64) << 32) ^ ((f as u64) << 16) ^ start as u64,
                );
                let v_star = Proposal::Value(Value::random(&mut rng, bits));
                let other = Proposal::Value(Value::random(&mut rng, bits));
                let members: Vec<usize> = cfg.members().collect();
                let faulty: Vec<usize> = sample(&mut rng, len, f)
                    .into_iter()
                    .map(|i| members[i])
                    .collect();
                let strategies: Vec<(ProcessId, Strategy)> = faulty
                    .iter()
                    .map(|&p| (ProcessId(p), random_strategy(&mut rng, 2)))
                    .collect();
                let plan = FaultPlan::new(strategies.clone(), seed);
                let input_for = |role: Role| match role {
                    Role::Primary => v_star.clone(),
                    Role::Alternate => other.clone(),
                };
                let make = |p: usize, v: Proposal| {
                    let input = cfg.committee_rank(p).map(|_| v);
                    Solo::new(
                        p,
                        x,
                        CdProcess::new(cfg, p, input.as_ref(), bits).expect("valid rank"),
                    )
                };
                let adv = CatalogAdversary::new(&plan, |pid, role| make(pid.0, input_for(role)));
                let nodes: Vec<Solo<CdProcess>> = (0..x)
                    .filter(|p| !faulty.contains(p))
                    .map(|p| make(p, v_star.clone()))
                    .collect();
                let (outs, traffic) = drive(x, nodes, adv, CD_ROUNDS);
                let ctx = format!(
                    "x={x} committee={start}..{} faulty={strategies:?} seed={seed}",
                    start + len
                );
                for node in &outs {
                    let p = extba::sim_engine::Node::id(node).0;
                    report.check(node.machine().obtained() == Some(&v_star), || {
                        format!("{ctx}: p{p} obtained {:?}", node.machine().obtained())
                    });
                    if cfg.committee_rank(p).is_none() {
                        report.check(traffic.process_total(p) == 0, || {
                            format!("{ctx}: non-member p{p} sent bits")
                        });
                    }
                }
            }
        }
    }
    report
}

/// Randomized agreement runs with `⌊(n-1)/3⌋` faults, each running a
/// random catalog strategy.
pub fn ext_random(n: usize, seeds: std::ops::Range<u64>, bit_len: usize) -> SuiteReport {
    let mut report = SuiteReport::new(format!("agreement sweep n={n}"));
    let rounds = extba::ext_protocol::total_rounds(n);
    for seed in seeds {
        report.case();
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37) ^ n as u64);
        let f = max_faults(n);
        let faults: Vec<(Strategy, usize)> = (0..f)
            .map(|_| (random_strategy(&mut rng, rounds), 1))
            .collect();
        let proposals = match rng.gen_range(0..3) {
            0 => ProposalMode::Unanimous(None),
            1 => ProposalMode::Distinct,
            _ => ProposalMode::Random { seed: rng.gen() },
        };
        let predicate = BuiltinValidity::ALL[rng.gen_range(0..3)];
        let sc = Scenario {
            n,
            bit_len,
            t: None,
            faults,
            proposals,
            predicate,
            seed,
        };
        check_run(&mut report, &sc);
    }
    report
}

fn check_run(report: &mut SuiteReport, sc: &Scenario) {
    match sc.run() {
        Ok(m) => {
            report.check(!m.contract_violated, || format!("{sc:?}: out of contract"));
            report.check(!m.guarantee_violated(), || {
                format!(
                    "{sc:?}: agreement={} termination={} validity={} strong_validity={}",
                    m.agreement_ok, m.termination_ok, m.validity_ok, m.strong_validity_ok
                )
            });
        }
        Err(e) => report.fail(format!("{sc:?}: {e}")),
    }
}

/// Every placement of up to `⌊(n-1)/3⌋` faults, each faulty process either
/// silent, equivocating or an impostor, across proposal modes and several seeds.
pub fn ext_exhaustive(n: usize, seeds: u64) -> SuiteReport {
    let mut report = SuiteReport::new(format!("exhaustive placements n={n}"));
    let t = max_faults(n);
    for f in 0..=t {
        for placement in (0..n).combinations(f) {
            for kinds in (0..f).map(|_| 0..3).multi_cartesian_product() {
                for seed in 0..seeds {
                    for proposals in [
                        ProposalMode::Unanimous(None),
                        ProposalMode::Distinct,
                        ProposalMode::Random { seed: seed + 17 },
                    ] {
                        report.case();
                        let entries = placement.iter().zip(&kinds).map(|(&p, &kind)| {
                            let s = match kind {
                                0 => Strategy::Silent,
                                1 => Strategy::Equivocate { seed },
                                _ => Strategy::Impostor,
                            };
                            (ProcessId(p), s)
                        });
                        let plan = FaultPlan::new(entries, seed);
                        let predicate = BuiltinValidity::EvenParity;
                        let sc = Scenario {
                            n,
                            bit_len: 40,
                            t: None,
                            faults: Vec::new(),
                            proposals,
                            predicate,
                            seed,
                        };
                        let mut spec = match sc.spec() {
                            Ok(s) => s,
                            Err(e) => {
                                report.fail(format!("{sc:?}: {e}"));
                                continue;
                            }
                        };
                        spec.plan = plan.clone();
                        match extba::sim_engine::run(&spec) {
                            Ok(m) => report.check(
                                !m.guarantee_violated() && !m.contract_violated,
                                || {
                                    format!(
                                        "n={n} plan={plan:?} seed={seed} {:?}: {m:?}",
                                        sc.proposals
                                    )
                                },
                            ),
                            Err(e) => report.fail(format!("n={n} plan={plan:?}: {e}")),
                        }
                    }
                }
            }
        }
    }
    report
}

fn random_value(rng: &mut ChaCha8Rng, max_bits: usize) -> Value {
    let bits = rng.gen_range(0..=max_bits);
    Value::random(rng, bits)
}

fn garbage(rng: &mut ChaCha8Rng, s: &Symbol) -> Symbol {
    loop {
        let g = Symbol::new(s.index(), (0..s.len()).map(|_| Gf16(rng.gen())).collect());
        if !g.same_elements(s) {
            return g;
        }
    }
}

/// Field arithmetic against the bit-serial reference.
pub fn gf_agreement(trials: u64, seed: u64) -> SuiteReport {
    let mut report = SuiteReport::new("gf(2^16) vs reference");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        report.case();
        let (a, b): (u16, u16) = (rng.gen(), rng.gen());
        let got = (Gf16(a) * Gf16(b)).0;
        report.check(got == ref_gf::mul(a, b), || {
            format!("{a:#06x} * {b:#06x} = {got:#06x}")
        });
        if a != 0 {
            let inv = Gf16(a).inverse().map(|x| x.0);
            report.check(inv == Some(ref_gf::inv(a)), || {
                format!("inverse of {a:#06x}")
            });
        }
    }
    report
}

/// Encode, corrupt up to the error budget, decode: the payload must come
/// back every time, and the symbols must match the reference encoder.
pub fn rs_trials(trials: u64, seed: u64) -> SuiteReport {
    let mut report = SuiteReport::new("rs encode/corrupt/decode");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..trials {
        report.case();
        let k = rng.gen_range(1..=8);
        let ns = rng.gen_range(k..=16);
        let v = random_value(&mut rng, 1024);
        let cw = gf_rs::rs_encode(&v, ns, k).expect("valid parameters");
        let framed = ref_rs::frame(v.as_bytes(), v.bit_len(), 0, k);
        let reference = ref_rs::encode(&framed, ns, k);
        let same = cw
            .symbols()
            .iter()
            .zip(&reference)
            .all(|(s, r)| s.elements().iter().map(|e| e.0).eq(r.iter().copied()));
        report.check(same, || {
            format!("trial {trial}: encoder differs from reference (k={k}, ns={ns})")
        });

        let m = rng.gen_range(k..=ns);
        let r = rng.gen_range(0..=(m - k) / 2);
        let mut received: Vec<Symbol> = sample(&mut rng, ns, m)
            .into_iter()
            .map(|i| cw.symbols()[i].clone())
            .collect();
        let errors = rng.gen_range(0..=r);
        for i in sample(&mut rng, m, errors) {
            received[i] = garbage(&mut rng, &received[i]);
        }
        let got = gf_rs::rs_decode(k, r, &received);
        report.check(got.as_ref() == Ok(&v), || {
            format!("trial {trial}: k={k} ns={ns} m={m} r={r} errors={errors}: {got:?}")
        });
    }
    report
}

/// The production decoder against the subset-interpolation oracle,
/// including corruption beyond the budget.
pub fn rs_oracle(trials: u64, seed: u64) -> SuiteReport {
    let mut report = SuiteReport::new("rs decoder vs brute-force oracle");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..trials {
        report.case();
        let k = rng.gen_range(1..=6);
        let ns = rng.gen_range(k..=12);
        let v = random_value(&mut rng, 160);
        let cw = gf_rs::rs_encode(&v, ns, k).expect("valid parameters");
        let r = (ns - k) / 2;
        let errors = rng.gen_range(0..=(r + 1).min(ns));
        let mut received = cw.symbols().to_vec();
        for i in sample(&mut rng, ns, errors) {
            received[i] = garbage(&mut rng, &received[i]);
        }
        let plain: Vec<(u16, Vec<u16>)> = received
            .iter()
            .map(|s| (s.index(), s.elements().iter().map(|e| e.0).collect()))
            .collect();
        let oracle = ref_rs::brute_decode(k, r, &plain).and_then(|f| ref_rs::unframe(&f));
        let ours = gf_rs::rs_decode(k, r, &received)
            .ok()
            .map(|v| (v.bit_len(), v.as_bytes().to_vec()));
        report.check(ours == oracle, || {
            format!("trial {trial}: k={k} ns={ns} r={r} errors={errors}: ours={ours:?} oracle={oracle:?}")
        });
    }
    report
}
