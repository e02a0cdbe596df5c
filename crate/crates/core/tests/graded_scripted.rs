//! Graded consensus against hand-scripted Byzantine processes.

use extba::binary_gc::Grade;
use extba::coding::{encode_proposal, symbol_len};
use extba::gf_rs::{Gf16, Symbol};
use extba::graded_consensus::{GcProcess, GC_ROUNDS};
use extba::reduce_cool::{data_count, SymbolPair};
use extba::sim_engine::message::{Body, ProcessId, RoundMessage, Tag};
use extba::sim_engine::{Engine, Scripted, Solo};
use extba::{Proposal, Value};

const N: usize = 7;
const T: usize = 2;
const CAP: usize = 96;
const FAULTY: [usize; 2] = [5, 6];

fn val(b: u8) -> Proposal {
    Proposal::Value(Value::from_bytes(vec![b; CAP / 8]))
}

fn msg(from: usize, to: usize, step: u8, body: Body) -> RoundMessage {
    RoundMessage {
        sender: ProcessId(from),
        receiver: ProcessId(to),
        tag: Tag::standalone(N, step),
        body,
    }
}

fn junk(index: usize, len: usize) -> Symbol {
    Symbol::new(
        index as u16,
        (0..len).map(|j| Gf16(0xBEEF ^ j as u16)).collect(),
    )
}

/// Faulty processes claim to hold `w` throughout COOL, push every bit
/// towards 1 and then try to poison the reconstruction.
fn colluding_for(w: &Proposal) -> impl FnMut(u32, &[RoundMessage]) -> Vec<RoundMessage> {
    let cw = encode_proposal(w, CAP, N, data_count(T)).unwrap();
    let len = symbol_len(CAP, data_count(T));
    move |round, _| {
        let step = round as u8;
        let mut out = Vec::new();
        for &f in &FAULTY {
            for to in 0..N {
                let body = match step {
                    1 => Body::Pair(SymbolPair {
                        for_receiver: cw.symbol(to + 1).clone(),
                        own: cw.symbol(f + 1).clone(),
                    }),
                    2 => Body::Indicator(true),
                    5 => Body::Vote(true),
                    6 => Body::Echo(true),
                    7 => Body::Help(junk(f + 1, len)),
                    8 => Body::Share(junk(f + 1, len)),
                    _ => continue,
                };
                out.push(msg(f, to, step, body));
            }
        }
        out
    }
}

fn run_gc(proposals: &[Proposal], w: &Proposal) -> Vec<GcProcess> {
    let nodes = (0..N)
        .filter(|p| !FAULTY.contains(p))
        .map(|p| {
            Solo::new(
                p,
                N,
                GcProcess::new(proposals[p].clone(), N, T, p, CAP).unwrap(),
            )
        })
        .collect();
    let mut engine = Engine::new(N, nodes, Scripted(colluding_for(w)));
    engine.run(GC_ROUNDS as u32);
    let (nodes, _, _) = engine.into_parts();
    nodes.into_iter().map(Solo::into_machine).collect()
}

#[test]
fn three_holders_and_two_colluders_fix_the_value() {
    let w = val(0xC3);
    let mut proposals = vec![w.clone(); N];
    proposals[3] = val(0x11);
    proposals[4] = val(0x22);
    let procs = run_gc(&proposals, &w);
    assert_eq!(procs.len(), 5);
    for (p, gc) in procs.iter().enumerate() {
        let out = gc.cool_output().unwrap();
        assert_eq!(out.success, p < 3, "p{p} COOL success");
        let d = gc.decision().expect("decided");
        assert_eq!(d.value, w, "p{p}");
        assert_eq!(d.grade, Grade::One, "p{p}");
        assert!(!gc.decode_failed());
    }
    // the shares of the former outsiders were repaired from S1 help
    let cw = encode_proposal(&w, CAP, N, data_count(T)).unwrap();
    for (p, gc) in procs.iter().enumerate() {
        assert!(
            gc.share().unwrap().same_elements(cw.symbol(p + 1)),
            "p{p} share"
        );
    }
}

#[test]
fn colluders_cannot_lift_a_lone_value() {
    // only one correct process holds w; the faulty pair cannot reach n - t
    let w = val(0xC3);
    let proposals: Vec<Proposal> = (0..N as u8).map(|b| val(b + 1)).collect();
    let mut proposals = proposals;
    proposals[0] = w.clone();
    let procs = run_gc(&proposals, &w);
    for (p, gc) in procs.iter().enumerate() {
        let out = gc.cool_output().unwrap();
        assert!(!out.success, "p{p}");
        let d = gc.decision().unwrap();
        assert_eq!(d.grade, Grade::Zero, "p{p}");
        assert_eq!(d.value, proposals[p], "p{p} keeps its own value");
    }
}
