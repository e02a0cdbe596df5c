//! One process's view of a (possibly nested) agreement instance.

use log::trace;

use super::schedule::{ext_schedule, halves, RoundSchedule, SegmentSpan};
use crate::binary_gc::Grade;
use crate::committee_dissemination::{CdProcess, CommitteeConfig};
use crate::error::ProtocolError;
use crate::gf_rs::MAX_SYMBOLS;
use crate::graded_consensus::{GcProcess, GradedDecision};
use crate::sim_engine::engine::Node;
use crate::sim_engine::message::{Inbox, ProcessId, RoundMachine, RoundMessage, Segment, Tag};
use crate::value::{Proposal, ValidityRule};

/// Largest threshold an instance of `m` members tolerates.
pub fn max_faults(m: usize) -> usize {
    m.saturating_sub(1) / 3
}

#[derive(Debug)]
enum Stage {
    Gc1(Box<GcProcess>),
    /// `None` while waiting out the other half's recursion.
    SubH1(Option<Box<ExtInstance>>),
    Cd1(Box<CdProcess>),
    Gc2(Box<GcProcess>),
    SubH2(Option<Box<ExtInstance>>),
    Cd2(Box<CdProcess>),
    Done,
}

/// Intermediate values, kept for inspection by tests and metrics.
#[derive(Clone, Debug, Default)]
pub struct ExtTrace {
    pub gc1: Option<GradedDecision>,
    pub v_h1: Option<Proposal>,
    pub v_cd1: Option<Proposal>,
    pub est: Option<Proposal>,
    pub gc2: Option<GradedDecision>,
    pub v_h2: Option<Proposal>,
    pub v_cd2: Option<Proposal>,
}

/// Estimate carried into the second graded consensus: the first half's
/// disseminated value replaces a grade-0 result when it is valid.
pub fn estimate(gc1: &GradedDecision, v_cd1: Option<&Proposal>, rule: &ValidityRule) -> Proposal {
    match v_cd1 {
        Some(v) if gc1.grade == Grade::Zero && rule.accepts_proposal(v) => v.clone(),
        _ => gc1.value.clone(),
    }
}

/// Grade 1 decides the graded value, otherwise whatever the second half
/// disseminated, or bottom.
pub fn final_decision(gc2: &GradedDecision, v_cd2: Option<&Proposal>) -> Proposal {
    match (gc2.grade, v_cd2) {
        (Grade::One, _) => gc2.value.clone(),
        (Grade::Zero, Some(v)) => v.clone(),
        (Grade::Zero, None) => Proposal::Bottom,
    }
}

#[derive(Debug)]
pub struct ExtInstance {
    lo: usize,
    hi: usize,
    me: usize,
    t: usize,
    rule: ValidityRule,
    /// Global round just before this instance's first round.
    start: u32,
    schedule: RoundSchedule,
    proposal: Proposal,
    stage: Stage,
    trace: ExtTrace,
    decision: Option<Proposal>,
    decided_round: Option<u32>,
    decode_failures: u32,
    dropped: u64,
}

impl ExtInstance {
    /// Top-level instance among processes `0..n`. `t` defaults to the
    /// largest tolerable threshold.
    pub fn root(
        n: usize,
        me: usize,
        proposal: Proposal,
        t: Option<usize>,
        rule: ValidityRule,
    ) -> Result<Self, ProtocolError> {
        let t = t.unwrap_or_else(|| max_faults(n));
        if n == 0 || n < 3 * t + 1 {
            return Err(ProtocolError::Resilience { n, t });
        }
        if n > MAX_SYMBOLS {
            return Err(ProtocolError::RankOutOfRange {
                rank: n,
                size: MAX_SYMBOLS,
            });
        }
        if me >= n {
            return Err(ProtocolError::RankOutOfRange { rank: me, size: n });
        }
        Ok(Self::nested(0, n, me, t, proposal, rule, 0))
    }

    fn nested(
        lo: usize,
        hi: usize,
        me: usize,
        t: usize,
        proposal: Proposal,
        rule: ValidityRule,
        start: u32,
    ) -> Self {
        let m = hi - lo;
        let mut inst = ExtInstance {
            lo,
            hi,
            me,
            t,
            schedule: ext_schedule(m),
            stage: Stage::Done,
            trace: ExtTrace::default(),
            decision: None,
            decided_round: None,
            decode_failures: 0,
            dropped: 0,
            rule,
            start,
            proposal,
        };
        if m == 1 {
            inst.decision = Some(inst.proposal.clone());
            inst.decided_round = Some(start);
        } else {
            let gc = inst.new_gc(inst.proposal.clone());
            inst.stage = Stage::Gc1(Box::new(gc));
        }
        inst
    }

    pub fn members(&self) -> std::ops::Range<usize> {
        self.lo..self.hi
    }

    pub fn threshold(&self) -> usize {
        self.t
    }

    pub fn schedule(&self) -> &RoundSchedule {
        &self.schedule
    }

    pub fn decision(&self) -> Option<&Proposal> {
        self.decision.as_ref()
    }

    /// Global round at whose end the decision was made.
    pub fn decided_round(&self) -> Option<u32> {
        self.decided_round
    }

    pub fn trace(&self) -> &ExtTrace {
        &self.trace
    }

    /// Reconstruction decode failures across this instance and every
    /// nested one this process took part in.
    pub fn decode_failures(&self) -> u32 {
        self.decode_failures
    }

    /// Messages discarded for carrying an unexpected tag or sender.
    pub fn dropped_messages(&self) -> u64 {
        self.dropped
    }

    fn size(&self) -> usize {
        self.hi - self.lo
    }

    fn rank(&self) -> usize {
        self.me - self.lo
    }

    fn h1_len(&self) -> usize {
        halves(self.size()).0
    }

    fn in_h1(&self) -> bool {
        self.rank() < self.h1_len()
    }

    fn new_gc(&self, proposal: Proposal) -> GcProcess {
        GcProcess::new(
            proposal,
            self.size(),
            self.t,
            self.rank(),
            self.rule.bit_len(),
        )
        .expect("instance thresholds satisfy n >= 3t + 1")
    }

    fn new_cd(&self, first_half: bool, input: Option<&Proposal>) -> CdProcess {
        let (a, b) = halves(self.size());
        let cfg = if first_half {
            CommitteeConfig::new(self.size(), 0, a)
        } else {
            CommitteeConfig::new(self.size(), a, b)
        }
        .expect("halves are valid committees");
        CdProcess::new(cfg, self.rank(), input, self.rule.bit_len())
            .expect("committee members always hold an input")
    }

    /// Builds the sub-instance for one half, or `None` for non-members.
    fn new_sub(
        &self,
        first_half: bool,
        proposal: Proposal,
        span: SegmentSpan,
    ) -> Option<Box<ExtInstance>> {
        let mid = self.lo + self.h1_len();
        let (lo, hi) = if first_half {
            (self.lo, mid)
        } else {
            (mid, self.hi)
        };
        (lo..hi).contains(&self.me).then(|| {
            Box::new(ExtInstance::nested(
                lo,
                hi,
                self.me,
                max_faults(hi - lo),
                proposal,
                self.rule.clone(),
                self.start + span.first - 1,
            ))
        })
    }

    fn segment_tag(&self, segment: Segment, step: u8) -> Tag {
        Tag {
            lo: self.lo as u32,
            hi: self.hi as u32,
            segment,
            step,
        }
    }

    fn local(&self, round: u32) -> u32 {
        round - self.start
    }

    fn step_in(&self, span: SegmentSpan, round: u32) -> u8 {
        (self.local(round) + 1 - span.first) as u8
    }

    fn current(&self) -> Option<(Segment, SegmentSpan)> {
        let s = &self.schedule;
        match self.stage {
            Stage::Gc1(_) => Some((Segment::Gc1, s.gc1)),
            Stage::Cd1(_) => Some((Segment::Cd1, s.cd1)),
            Stage::Gc2(_) => Some((Segment::Gc2, s.gc2)),
            Stage::Cd2(_) => Some((Segment::Cd2, s.cd2)),
            _ => None,
        }
    }

    fn machine(&mut self) -> Option<&mut dyn RoundMachine> {
        match &mut self.stage {
            Stage::Gc1(m) | Stage::Gc2(m) => Some(m.as_mut()),
            Stage::Cd1(m) | Stage::Cd2(m) => Some(m.as_mut()),
            _ => None,
        }
    }

    fn send_round(&mut self, round: u32) -> Vec<RoundMessage> {
        if round <= self.start || self.decision.is_some() {
            return Vec::new();
        }
        if let Stage::SubH1(sub) | Stage::SubH2(sub) = &mut self.stage {
            return sub
                .as_mut()
                .map(|s| s.send_round(round))
                .unwrap_or_default();
        }
        let Some((segment, span)) = self.current() else {
            return Vec::new();
        };
        let step = self.step_in(span, round);
        let tag = self.segment_tag(segment, step);
        let (lo, me) = (self.lo, self.me);
        let out = self.machine().expect("segment stage").send(step);
        out.into_iter()
            .map(|(rank, body)| RoundMessage {
                sender: ProcessId(me),
                receiver: ProcessId(lo + rank),
                tag,
                body,
            })
            .collect()
    }

    fn deliver_round(&mut self, round: u32, inbox: &[RoundMessage]) {
        if round <= self.start || self.decision.is_some() {
            return;
        }
        if let Stage::SubH1(sub) | Stage::SubH2(sub) = &mut self.stage {
            if let Some(s) = sub.as_mut() {
                s.deliver_round(round, inbox);
            }
            let span = match self.stage {
                Stage::SubH1(_) => self.schedule.sub_h1,
                _ => self.schedule.sub_h2,
            };
            if self.local(round) == span.last() {
                self.finish_sub();
            }
            return;
        }
        let Some((segment, span)) = self.current() else {
            return;
        };
        let step = self.step_in(span, round);
        let tag = self.segment_tag(segment, step);
        let (lo, hi, me) = (self.lo, self.hi, self.me);
        let mut dropped = 0u64;
        let entries = inbox.iter().filter_map(|m| {
            let ok = m.receiver.0 == me && m.tag == tag && (lo..hi).contains(&m.sender.0);
            if ok {
                Some((m.sender.0 - lo, &m.body))
            } else {
                dropped += 1;
                None
            }
        });
        let rank_inbox = Inbox::from_entries(hi - lo, entries);
        self.machine()
            .expect("segment stage")
            .deliver(step, &rank_inbox);
        if dropped > 0 {
            trace!("p{me} round {round}: dropped {dropped} foreign messages");
            self.dropped += dropped;
        }
        if step as u32 == span.len {
            self.finish_segment(round);
        }
    }

    fn finish_segment(&mut self, round: u32) {
        match std::mem::replace(&mut self.stage, Stage::Done) {
            Stage::Gc1(gc) => {
                self.decode_failures += gc.decode_failed() as u32;
                let d = gc.decision().cloned().expect("graded consensus decided");
                let sub = if self.in_h1() {
                    self.new_sub(true, d.value.clone(), self.schedule.sub_h1)
                } else {
                    None
                };
                self.trace.gc1 = Some(d);
                self.stage = Stage::SubH1(sub);
                self.skip_empty_sub();
            }
            Stage::Cd1(cd) => {
                let v_cd1 = cd.obtained().cloned();
                let gc1 = self.trace.gc1.as_ref().expect("gc1 recorded");
                let est = estimate(gc1, v_cd1.as_ref(), &self.rule);
                self.trace.v_cd1 = v_cd1;
                self.trace.est = Some(est.clone());
                self.stage = Stage::Gc2(Box::new(self.new_gc(est)));
            }
            Stage::Gc2(gc) => {
                self.decode_failures += gc.decode_failed() as u32;
                let d = gc.decision().cloned().expect("graded consensus decided");
                let sub = if self.in_h1() {
                    None
                } else {
                    self.new_sub(false, d.value.clone(), self.schedule.sub_h2)
                };
                self.trace.gc2 = Some(d);
                self.stage = Stage::SubH2(sub);
                self.skip_empty_sub();
            }
            Stage::Cd2(cd) => {
                self.trace.v_cd2 = cd.obtained().cloned();
                let gc2 = self.trace.gc2.as_ref().expect("gc2 recorded");
                let decision = final_decision(gc2, self.trace.v_cd2.as_ref());
                self.decision = Some(decision);
                self.decided_round = Some(round);
            }
            other => self.stage = other,
        }
    }

    // One-member halves decide on the spot and take no rounds.
    fn skip_empty_sub(&mut self) {
        let span = match self.stage {
            Stage::SubH1(_) => self.schedule.sub_h1,
            Stage::SubH2(_) => self.schedule.sub_h2,
            _ => return,
        };
        if span.len == 0 {
            self.finish_sub();
        }
    }

    fn finish_sub(&mut self) {
        match std::mem::replace(&mut self.stage, Stage::Done) {
            Stage::SubH1(sub) => {
                let v_h1 = sub.map(|s| {
                    self.decode_failures += s.decode_failures;
                    self.dropped += s.dropped;
                    s.decision.unwrap_or(Proposal::Bottom)
                });
                let cd = self.new_cd(true, v_h1.as_ref());
                self.trace.v_h1 = v_h1;
                self.stage = Stage::Cd1(Box::new(cd));
            }
            Stage::SubH2(sub) => {
                let v_h2 = sub.map(|s| {
                    self.decode_failures += s.decode_failures;
                    self.dropped += s.dropped;
                    s.decision.unwrap_or(Proposal::Bottom)
                });
                let cd = self.new_cd(false, v_h2.as_ref());
                self.trace.v_h2 = v_h2;
                self.stage = Stage::Cd2(Box::new(cd));
            }
            other => self.stage = other,
        }
    }
}

impl Node for ExtInstance {
    fn id(&self) -> ProcessId {
        ProcessId(self.me)
    }

    fn send(&mut self, round: u32) -> Vec<RoundMessage> {
        self.send_round(round)
    }

    fn deliver(&mut self, round: u32, inbox: &[RoundMessage]) {
        self.deliver_round(round, inbox)
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::value::{BuiltinValidity, Value};

    fn val(b: u8) -> Proposal {
        Proposal::Value(Value::from_bytes(vec![b; 8]))
    }

    fn graded(value: Proposal, grade: Grade) -> GradedDecision {
        GradedDecision { value, grade }
    }

    #[test]
    fn estimate_keeps_grade_one_value() {
        let rule = ValidityRule::new(64, Arc::new(BuiltinValidity::AlwaysTrue));
        let gc1 = graded(val(1), Grade::One);
        assert_eq!(estimate(&gc1, Some(&val(2)), &rule), val(1));
        assert_eq!(estimate(&gc1, None, &rule), val(1));
    }

    #[test]
    fn estimate_adopts_valid_disseminated_value_at_grade_zero() {
        let rule = ValidityRule::new(64, Arc::new(BuiltinValidity::AlwaysTrue));
        let gc1 = graded(val(1), Grade::Zero);
        assert_eq!(estimate(&gc1, Some(&val(2)), &rule), val(2));
        assert_eq!(estimate(&gc1, Some(&Proposal::Bottom), &rule), val(1));
        assert_eq!(estimate(&gc1, None, &rule), val(1));
        // wrong length is invalid
        let short = Proposal::Value(Value::from_bytes(vec![2; 4]));
        assert_eq!(estimate(&gc1, Some(&short), &rule), val(1));
    }

    #[test]
    fn decision_by_grade() {
        assert_eq!(
            final_decision(&graded(val(1), Grade::One), Some(&val(2))),
            val(1)
        );
        assert_eq!(
            final_decision(&graded(val(1), Grade::Zero), Some(&val(2))),
            val(2)
        );
        assert_eq!(
            final_decision(&graded(val(1), Grade::Zero), None),
            Proposal::Bottom
        );
    }
}
