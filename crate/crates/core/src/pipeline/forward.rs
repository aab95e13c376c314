//! Operand forwarding network.

use serde::Serialize;

use super::{PipelineConfig, StageSlot};
use crate::isa::{DecodedInstr, InstrKind, Reg, Word};

/// Source selected for one ALU operand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ForwardSel {
    RegFile,
    /// Result held in the EX/MEM register (the MEM-stage occupant).
    FromExMem,
    /// Five stages: the MEM/WB register. Four stages: the write-back register
    /// feeding the register file.
    FromMemWb,
    /// Three stages: the single result register after the merged EX stage,
    /// holding either the ALU result or the loaded data.
    FromExWb3Stage,
    Immediate,
    Pc,
}

impl ForwardSel {
    pub fn is_bypass(self) -> bool {
        matches!(self, ForwardSel::FromExMem | ForwardSel::FromMemWb | ForwardSel::FromExWb3Stage)
    }

    /// Bypass sources that exist in a configuration, youngest first.
    pub fn bypasses(config: PipelineConfig) -> &'static [ForwardSel] {
        match config {
            PipelineConfig::Three => &[ForwardSel::FromExWb3Stage],
            PipelineConfig::Four => &[ForwardSel::FromExMem, ForwardSel::FromMemWb],
            PipelineConfig::Five => &[ForwardSel::FromExMem, ForwardSel::FromMemWb],
        }
    }
}

/// An in-flight result that can be forwarded.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Producer {
    pub sel: ForwardSel,
    pub rd: Reg,
    pub value: Word,
}

impl Producer {
    /// A producer for `slot`, or `None` when the slot holds no register
    /// result (bubble, faulted, no `rd`, or `rd = x0`).
    pub fn from_slot(slot: &StageSlot, sel: ForwardSel) -> Option<Producer> {
        (slot.is_live() && slot.fault.is_none() && slot.instr.writes_nonzero_rd()).then(|| Producer {
            sel,
            rd: slot.instr.rd,
            value: slot.result(),
        })
    }
}

fn select(reg: Reg, used: bool, producers: &[Producer]) -> ForwardSel {
    if !used || reg.is_zero() {
        return ForwardSel::RegFile;
    }
    producers.iter().find(|p| p.rd == reg && !p.rd.is_zero()).map_or(ForwardSel::RegFile, |p| p.sel)
}

/// Picks the source of `rs1` and `rs2` for `consumer`. `producers` must be
/// ordered youngest first; the first match wins.
pub fn forward_select(config: PipelineConfig, consumer: &DecodedInstr, producers: &[Producer]) -> [ForwardSel; 2] {
    debug_assert!(producers.iter().all(|p| ForwardSel::bypasses(config).contains(&p.sel)));
    [select(consumer.rs1, consumer.uses_rs1, producers), select(consumer.rs2, consumer.uses_rs2, producers)]
}

/// Value delivered by `sel`, falling back to the register-file read.
pub fn resolve(sel: ForwardSel, producers: &[Producer], regfile_value: Word) -> Word {
    producers.iter().find(|p| p.sel == sel).map_or(regfile_value, |p| p.value)
}

/// Final ALU input selection: register sources from `regs`, or the PC /
/// immediate muxes, depending on the instruction kind.
pub fn operand_select(instr: &DecodedInstr, regs: [ForwardSel; 2]) -> [ForwardSel; 2] {
    let a = match instr.kind {
        InstrKind::Auipc | InstrKind::Jal => ForwardSel::Pc,
        _ => regs[0],
    };
    let b = match instr.kind {
        InstrKind::AluReg | InstrKind::Branch => regs[1],
        InstrKind::Fence | InstrKind::Ecall | InstrKind::Ebreak => ForwardSel::RegFile,
        _ => ForwardSel::Immediate,
    };
    [a, b]
}
