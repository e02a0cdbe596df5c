use extba::coding::symbol_len;
use extba::committee_dissemination::{CdProcess, CommitteeConfig, CD_ROUNDS};
use extba::gf_rs::{Gf16, Symbol};
use extba::sim_engine::message::{Body, ProcessId, RoundMessage, Tag};
use extba::sim_engine::{Engine, Passive, Scripted, Solo};
use extba::{Proposal, Value};

const CAP: usize = 128;

fn v() -> Proposal {
    Proposal::Value(Value::from_bytes(vec![0x6E; CAP / 8]))
}

fn nodes(cfg: CommitteeConfig, faulty: &[usize]) -> Vec<Solo<CdProcess>> {
    let input = v();
    (0..cfg.entire())
        .filter(|p| !faulty.contains(p))
        .map(|p| {
            Solo::new(
                p,
                cfg.entire(),
                CdProcess::new(cfg, p, Some(&input), CAP).unwrap(),
            )
        })
        .collect()
}

#[test]
fn whole_system_obtains_the_committee_value() {
    for entire in 2usize..=12 {
        for len in [entire / 2, entire.div_ceil(2)] {
            let cfg = CommitteeConfig::new(entire, entire - len, len).unwrap();
            let mut engine = Engine::new(entire, nodes(cfg, &[]), Passive);
            engine.run(CD_ROUNDS as u32);
            for node in engine.nodes() {
                assert_eq!(node.machine().obtained(), Some(&v()), "x={entire} x'={len}");
            }
        }
    }
}

#[test]
fn liar_in_committee_is_outvoted() {
    // committee of 4 has y' = 1, so one bad symbol is corrected
    let cfg = CommitteeConfig::new(8, 0, 4).unwrap();
    let len = symbol_len(CAP, cfg.k());
    let liar = move |round: u32, _: &[RoundMessage]| {
        if round != 1 {
            return Vec::new();
        }
        (0..8)
            .map(|to| RoundMessage {
                sender: ProcessId(2),
                receiver: ProcessId(to),
                tag: Tag::standalone(8, 1),
                body: Body::Reconstruct(Symbol::new(3, vec![Gf16(to as u16 + 9); len])),
            })
            .collect()
    };
    let mut engine = Engine::new(8, nodes(cfg, &[2]), Scripted(liar));
    engine.run(CD_ROUNDS as u32);
    for node in engine.nodes() {
        assert_eq!(node.machine().obtained(), Some(&v()));
    }
}

#[test]
fn too_few_symbols_obtain_nothing() {
    // two of four members silent: below x' - y' = 3
    let cfg = CommitteeConfig::new(8, 4, 4).unwrap();
    let mut engine = Engine::new(8, nodes(cfg, &[4, 7]), Passive);
    engine.run(CD_ROUNDS as u32);
    for node in engine.nodes() {
        assert!(node.machine().finished());
        assert_eq!(node.machine().obtained(), None);
    }
}
