use serde::Serialize;

use super::forward::ForwardSel;
use super::hazard::Redirect;
use crate::event::{HaltReason, RetireEvent};
use crate::isa::Word;

/// What a stage holds during one cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Occupancy {
    Empty,
    Bubble,
    Instr(Word),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct PerfCounters {
    pub cycles: u64,
    pub retired: u64,
    /// Bubbles injected by taken branches and jumps (two per redirect).
    pub taken_branch_flushes: u64,
    pub load_use_stalls: u64,
}

impl PerfCounters {
    pub fn cpi(&self) -> Option<f64> {
        (self.retired > 0).then(|| self.cycles as f64 / self.retired as f64)
    }
}

/// Snapshot of one clock cycle.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct CycleReport {
    pub cycle: u64,
    /// Stage occupancy at the start of the cycle, IF first.
    pub occupancy: Vec<Occupancy>,
    pub retired: Option<RetireEvent>,
    /// The decode stage was held by a load-use interlock.
    pub stalled: bool,
    /// Branch or jump resolved in EX this cycle.
    pub redirect: Option<Redirect>,
    /// ALU input selection of the EX occupant, if any.
    pub ex_operands: Option<[ForwardSel; 2]>,
    pub halt: Option<HaltReason>,
}
