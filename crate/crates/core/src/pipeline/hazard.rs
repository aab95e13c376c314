//! Load-use interlock, control-transfer resolution and the dedicated
//! address adder of the three-stage organization.

use serde::Serialize;

use super::{PipelineConfig, StageSlot};
use crate::isa::{self, DecodedInstr, InstrKind, Word};
use crate::mem::MemFault;

/// Control-flow outcome of a branch or jump resolved in EX.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Redirect {
    pub taken: bool,
    pub target: Word,
}

/// True when the decode-stage instruction must wait one cycle for a load
/// currently in EX. The three-stage pipeline reads memory alongside the ALU
/// and never interlocks.
pub fn detect_load_use(config: PipelineConfig, decoder: &DecodedInstr, ex: &StageSlot) -> bool {
    if config == PipelineConfig::Three || !ex.is_live() || !ex.instr.is_load() {
        return false;
    }
    let rd = ex.instr.rd;
    !rd.is_zero() && ((decoder.uses_rs1 && decoder.rs1 == rd) || (decoder.uses_rs2 && decoder.rs2 == rd))
}

/// Resolves a branch or jump from the post-forwarding operand values in
/// `slot`. A taken transfer to a target that is not word aligned is a fault.
pub fn resolve_redirect(slot: &StageSlot) -> Result<Redirect, MemFault> {
    let d = &slot.instr;
    let (taken, target) = match d.kind {
        InstrKind::Branch => {
            let op = d.branch_op.expect("branch carries a condition");
            (isa::branch_taken(op, slot.rs1_value, slot.rs2_value), slot.pc.wrapping_add(d.imm))
        }
        InstrKind::Jal => (true, slot.pc.wrapping_add(d.imm)),
        InstrKind::Jalr => (true, slot.rs1_value.wrapping_add(d.imm) & !1),
        _ => (false, slot.pc.wrapping_add(4)),
    };
    if !taken {
        return Ok(Redirect { taken, target: slot.pc.wrapping_add(4) });
    }
    if target % 4 != 0 {
        return Err(MemFault::Misaligned { addr: target, bytes: 4 });
    }
    Ok(Redirect { taken, target })
}

/// Effective address from the dedicated adder in ID (three stages only).
/// `slot.rs1_value` must already carry any forwarded value.
pub fn compute_mem_addr_in_id(slot: &StageSlot) -> Word {
    debug_assert!(slot.instr.is_load() || slot.instr.is_store());
    slot.rs1_value.wrapping_add(slot.instr.imm)
}
