use std::sync::Arc;

use extba::ext_protocol::total_rounds;
use extba::sim_engine::message::ProcessId;
use extba::sim_engine::sweep::Scenario;
use extba::sim_engine::{run, EvalOrder, FaultPlan, ProposalMode, RunSpec, Strategy};
use extba::{BuiltinValidity, Proposal, ValidityRule, Value};

fn rule(bits: usize) -> ValidityRule {
    ValidityRule::new(bits, Arc::new(BuiltinValidity::AlwaysTrue))
}

fn value(byte: u8, len: usize) -> Value {
    Value::from_bytes(vec![byte; len / 8])
}

#[test]
fn single_process_decides_its_proposal_at_round_zero() {
    let spec = RunSpec::new(1, rule(8), vec![value(0x3C, 8)], FaultPlan::none());
    let m = run(&spec).unwrap();
    assert_eq!(m.rounds, 0);
    assert_eq!(m.total_bits, 0);
    assert_eq!(m.decisions[&ProcessId(0)], Proposal::Value(value(0x3C, 8)));
    assert!(m.agreement_ok && m.strong_validity_ok && m.validity_ok);
}

#[test]
fn unanimous_four_decide_at_sixty() {
    let w = value(0xA5, 64);
    let spec = RunSpec::new(4, rule(64), vec![w.clone(); 4], FaultPlan::none());
    let m = run(&spec).unwrap();
    assert_eq!(m.rounds, 60);
    assert!(m
        .decisions
        .values()
        .all(|d| *d == Proposal::Value(w.clone())));
    assert!(m.decision_rounds.values().all(|&r| r == 60));
    assert!(m.agreement_ok && m.strong_validity_ok && m.termination_ok);
}

#[test]
fn distinct_proposals_agree_without_faults() {
    for n in 2..=10 {
        let props: Vec<Value> = (0..n).map(|i| value(i as u8, 32)).collect();
        let m = run(&RunSpec::new(n, rule(32), props, FaultPlan::none())).unwrap();
        assert!(m.agreement_ok && m.validity_ok, "n={n}");
        assert_eq!(m.rounds, total_rounds(n));
    }
}

fn byz_at(
    n: usize,
    pid: usize,
    strategy: Strategy,
    props: Vec<Value>,
) -> extba::sim_engine::RunMetrics {
    let plan = FaultPlan::new([(ProcessId(pid), strategy)], 9);
    run(&RunSpec::new(n, rule(32), props, plan)).unwrap()
}

#[test]
fn byzantine_in_either_half_of_four() {
    let props = vec![value(1, 32), value(2, 32), value(1, 32), value(2, 32)];
    for pid in 0..4 {
        for s in [
            Strategy::Silent,
            Strategy::Equivocate { seed: 1 },
            Strategy::GarbageSymbols { seed: 2 },
            Strategy::IndicatorLiar { seed: 3 },
            Strategy::Crash { round: 15 },
        ] {
            let m = byz_at(4, pid, s, props.clone());
            assert!(!m.contract_violated);
            assert!(
                m.agreement_ok && m.validity_ok && m.termination_ok,
                "pid {pid} {s}"
            );
        }
    }
}

#[test]
fn evaluation_order_does_not_matter() {
    let sc = Scenario {
        n: 7,
        bit_len: 48,
        t: None,
        faults: vec![(Strategy::Equivocate { seed: 5 }, 2)],
        proposals: ProposalMode::Distinct,
        predicate: BuiltinValidity::EvenParity,
        seed: 11,
    };
    let base = sc.spec().unwrap();
    let a = run(&base).unwrap();
    let mut rev = base.clone();
    rev.order = EvalOrder::Reversed;
    let mut perm = base.clone();
    perm.order = EvalOrder::Permuted(vec![2, 0, 4, 1, 3]);
    assert_eq!(a, run(&rev).unwrap());
    assert_eq!(a, run(&perm).unwrap());
}
