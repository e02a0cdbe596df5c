//! Runs a single sub-protocol machine under the engine, outside any
//! agreement instance.

use super::engine::Node;
use super::message::{Inbox, ProcessId, RoundMachine, RoundMessage, Tag};

#[derive(Clone, Debug)]
pub struct Solo<M> {
    me: usize,
    n: usize,
    machine: M,
}

impl<M: RoundMachine> Solo<M> {
    pub fn new(me: usize, n: usize, machine: M) -> Self {
        Solo { me, n, machine }
    }

    pub fn machine(&self) -> &M {
        &self.machine
    }

    pub fn into_machine(self) -> M {
        self.machine
    }
}

impl<M: RoundMachine> Node for Solo<M> {
    fn id(&self) -> ProcessId {
        ProcessId(self.me)
    }

    fn send(&mut self, round: u32) -> Vec<RoundMessage> {
        if round > self.machine.rounds() as u32 {
            return Vec::new();
        }
        let step = round as u8;
        let tag = Tag::standalone(self.n, step);
        self.machine
            .send(step)
            .into_iter()
            .map(|(to, body)| RoundMessage {
                sender: ProcessId(self.me),
                receiver: ProcessId(to),
                tag,
                body,
            })
            .collect()
    }

    fn deliver(&mut self, round: u32, inbox: &[RoundMessage]) {
        if round > self.machine.rounds() as u32 {
            return;
        }
        let step = round as u8;
        let tag = Tag::standalone(self.n, step);
        let entries = inbox
            .iter()
            .filter(|m| m.tag == tag && m.receiver.0 == self.me)
            .map(|m| (m.sender.0, &m.body));
        self.machine
            .deliver(step, &Inbox::from_entries(self.n, entries));
    }
}
