//! Exhaustive checks of the one-bit graded consensus.
//!
//! A correct process's behaviour depends only on how many 0s and 1s it
//! receives, so enumerating, per receiver, every count the faulty processes
//! can add covers every adversary. [`literal`] double-checks that reduction
//! on small systems by simulating every message pattern outright.

use itertools::Itertools;

use extba::binary_gc::{bgc_decide, bgc_round_2, BgcProcess, BitGradedDecision, Grade};
use extba::sim_engine::message::{Body, Inbox, RoundMachine};

use crate::report::SuiteReport;

fn inbox_bits(zeros: usize, ones: usize) -> impl Iterator<Item = bool> {
    std::iter::repeat_n(false, zeros).chain(std::iter::repeat_n(true, ones))
}

/// `(zeros, ones)` pairs the faulty processes can add.
fn extra_counts(f: usize) -> Vec<(usize, usize)> {
    (0..=f)
        .flat_map(|z| (0..=f - z).map(move |o| (z, o)))
        .collect()
}

fn check_outcomes(
    report: &mut SuiteReport,
    ctx: &str,
    bits: &[bool],
    decisions: &[Vec<BitGradedDecision>],
) {
    let unanimous = bits.iter().all_equal_value().ok().copied();
    if let Some(b) = unanimous {
        let ok = decisions
            .iter()
            .flatten()
            .all(|d| d.bit == b && d.grade == Grade::One);
        report.check(ok, || format!("{ctx}: strong validity, unanimous {b}"));
    }
    let graded_one: Vec<bool> = decisions
        .iter()
        .flatten()
        .filter(|d| d.grade == Grade::One)
        .map(|d| d.bit)
        .unique()
        .collect();
    if let Some(&b) = graded_one.first() {
        let ok = graded_one.len() == 1 && decisions.iter().flatten().all(|d| d.bit == b);
        report.check(ok, || format!("{ctx}: consistency around ({b}, 1)"));
    }
    let ok = decisions.iter().flatten().all(|d| bits.contains(&d.bit));
    report.check(ok, || {
        format!("{ctx}: decided a bit no correct process proposed")
    });
}

/// Every fault placement with up to `⌊(n-1)/3⌋` faults, every assignment of
/// correct bits, every adversary (up to count equivalence).
pub fn exhaustive(n: usize) -> SuiteReport {
    let t = (n - 1) / 3;
    let mut report = SuiteReport::new(format!("bgc exhaustive n={n}"));
    for f in 0..=t {
        for faulty in (0..n).combinations(f) {
            let correct = n - f;
            for mask in 0..(1u32 << correct) {
                report.case();
                let bits: Vec<bool> = (0..correct).map(|i| mask >> i & 1 == 1).collect();
                let c1 = bits.iter().filter(|&&b| b).count();
                let c0 = correct - c1;
                let echo_options: Vec<Option<bool>> = extra_counts(f)
                    .into_iter()
                    .map(|(z, o)| bgc_round_2(n, t, inbox_bits(c0 + z, c1 + o)))
                    .unique()
                    .collect();
                let ctx = format!("n={n} faulty={faulty:?} bits={bits:?}");
                report.check(
                    !(echo_options.contains(&Some(false)) && echo_options.contains(&Some(true))),
                    || format!("{ctx}: correct processes can echo different bits"),
                );
                // only the echo counts matter, so enumerate multisets
                for combo in echo_options.iter().combinations_with_replacement(correct) {
                    let e1 = combo.iter().filter(|e| ***e == Some(true)).count();
                    let e0 = combo.iter().filter(|e| ***e == Some(false)).count();
                    let decisions: Vec<Vec<BitGradedDecision>> = bits
                        .iter()
                        .map(|&b| {
                            extra_counts(f)
                                .into_iter()
                                .map(|(z, o)| bgc_decide(n, t, b, inbox_bits(e0 + z, e1 + o)))
                                .collect()
                        })
                        .collect();
                    check_outcomes(
                        &mut report,
                        &format!("{ctx} echoes={combo:?}"),
                        &bits,
                        &decisions,
                    );
                }
            }
        }
    }
    report
}

/// Literal simulation: every faulty process sends 0, 1 or nothing to each
/// correct process in each of the two rounds. Feasible for `n <= 5`.
pub fn literal(n: usize) -> SuiteReport {
    let t = (n - 1) / 3;
    let mut report = SuiteReport::new(format!("bgc literal n={n}"));
    let choices = [None, Some(false), Some(true)];
    for faulty in (0..n).combinations(t) {
        let correct: Vec<usize> = (0..n).filter(|p| !faulty.contains(p)).collect();
        let slots = correct.len() * faulty.len();
        for mask in 0..(1u32 << correct.len()) {
            let bits: Vec<bool> = (0..correct.len()).map(|i| mask >> i & 1 == 1).collect();
            let patterns = (0..2 * slots)
                .map(|_| choices.iter())
                .multi_cartesian_product();
            for pattern in patterns {
                report.case();
                let (r1, r2) = pattern.split_at(slots);
                let decisions = simulate(n, t, &correct, &faulty, &bits, r1, r2);
                let ctx = format!("n={n} faulty={faulty:?} bits={bits:?} r1={r1:?} r2={r2:?}");
                let as_lists: Vec<Vec<BitGradedDecision>> =
                    decisions.into_iter().map(|d| vec![d]).collect();
                check_outcomes(&mut report, &ctx, &bits, &as_lists);
            }
        }
    }
    report
}

fn simulate(
    n: usize,
    t: usize,
    correct: &[usize],
    faulty: &[usize],
    bits: &[bool],
    r1: &[&Option<bool>],
    r2: &[&Option<bool>],
) -> Vec<BitGradedDecision> {
    let mut procs: Vec<BgcProcess> = bits.iter().map(|&b| BgcProcess::new(n, t, b)).collect();
    for (step, faulty_bits) in [(1u8, r1), (2u8, r2)] {
        let sent: Vec<Vec<(usize, Body)>> = procs.iter_mut().map(|p| p.send(step)).collect();
        for (ci, &me) in correct.iter().enumerate() {
            let mut entries: Vec<(usize, Body)> = Vec::new();
            for (si, &s) in correct.iter().enumerate() {
                for (to, body) in &sent[si] {
                    if *to == me {
                        entries.push((s, body.clone()));
                    }
                }
            }
            for (fi, &fp) in faulty.iter().enumerate() {
                if let Some(b) = *faulty_bits[fi * correct.len() + ci] {
                    let body = if step == 1 {
                        Body::Vote(b)
                    } else {
                        Body::Echo(b)
                    };
                    entries.push((fp, body));
                }
            }
            let inbox = Inbox::from_entries(n, entries.iter().map(|(s, b)| (*s, b)));
            procs[ci].deliver(step, &inbox);
        }
    }
    procs
        .iter()
        .map(|p| p.decision().expect("two rounds ran"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_processes() {
        let r = exhaustive(4);
        assert!(r.passed(), "{r}");
        let r = literal(4);
        assert!(r.passed(), "{r}");
    }
}
