//! Records shared by the golden model and the pipeline: retirement events,
//! faults and halt reasons.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::isa::{IllegalInstruction, MemWidth, Reg, Word};
use crate::mem::MemFault;

/// A memory store as seen at retirement. `data` is truncated to `width`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct MemWrite {
    pub addr: Word,
    pub width: MemWidth,
    pub data: Word,
}

/// The architectural effect of one retired instruction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct RetireEvent {
    pub pc: Word,
    pub raw: Word,
    /// Absent for instructions that write no register and for writes to `x0`.
    pub wrote_rd: Option<(Reg, Word)>,
    pub mem_write: Option<MemWrite>,
    pub next_pc: Word,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Error, Serialize)]
pub enum Fault {
    #[error("illegal instruction {0:#010x}")]
    IllegalInstruction(Word),
    #[error("memory fault: {0}")]
    Memory(#[from] MemFault),
}

impl From<IllegalInstruction> for Fault {
    fn from(e: IllegalInstruction) -> Self {
        Fault::IllegalInstruction(e.0)
    }
}

/// A fault attributed to the instruction at `pc`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Error, Serialize)]
#[error("{fault} at pc {pc:#010x}")]
pub struct Trap {
    pub pc: Word,
    pub fault: Fault,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum HaltReason {
    Ecall,
    Ebreak,
    Trap(Trap),
}

impl HaltReason {
    pub fn is_ok(&self) -> bool {
        !matches!(self, HaltReason::Trap(_))
    }
}

impl fmt::Display for HaltReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HaltReason::Ecall => f.write_str("ecall"),
            HaltReason::Ebreak => f.write_str("ebreak"),
            HaltReason::Trap(t) => write!(f, "trap: {t}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("the simulator has already halted")]
    AlreadyHalted,
    #[error(transparent)]
    Trap(#[from] Trap),
}

/// How a bounded run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum RunOutcome {
    Halted(HaltReason),
    StepLimitExceeded,
}

impl RunOutcome {
    pub fn halt_reason(&self) -> Option<HaltReason> {
        match self {
            RunOutcome::Halted(h) => Some(*h),
            RunOutcome::StepLimitExceeded => None,
        }
    }
}

impl fmt::Display for RunOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunOutcome::Halted(h) => h.fmt(f),
            RunOutcome::StepLimitExceeded => f.write_str("step limit exceeded"),
        }
    }
}
