//! Recursive-halving agreement: graded consensus on everything, recursion
//! on each half, and committee dissemination of each half's result back to
//! the whole instance.

mod instance;
mod schedule;

pub use instance::{estimate, final_decision, max_faults, ExtInstance, ExtTrace};
pub use schedule::{ext_schedule, halves, total_rounds, RoundSchedule, SegmentSpan};

use crate::sim_engine::engine::Node;
use crate::sim_engine::message::RoundMessage;
use crate::value::Proposal;

/// Delivers round `round`'s inbox and returns the messages for the next
/// round, plus the decision if it was made in this round.
pub fn ext_step(
    inst: &mut ExtInstance,
    round: u32,
    inbox: &[RoundMessage],
) -> (Vec<RoundMessage>, Option<Proposal>) {
    let before = inst.decision().is_some();
    inst.deliver(round, inbox);
    let out = inst.send(round + 1);
    let fresh = if before {
        None
    } else {
        inst.decision().cloned()
    };
    (out, fresh)
}
