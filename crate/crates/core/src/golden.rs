//! Instruction-level reference simulator.
//!
//! Executes one instruction per [`ArchState::step`] with a combinational
//! memory view. Its retirement stream defines correct behavior for every
//! pipeline organization.

use crate::event::{Fault, HaltReason, MemWrite, RetireEvent, RunOutcome, StepError, Trap};
use crate::isa::{self, InstrKind, MemAccess, Reg, Word};
use crate::mem::{MemFault, MemSystem};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArchState {
    pub pc: Word,
    regs: [Word; 32],
    pub mem: MemSystem,
    pub halted: bool,
    pub exit_code: Word,
    pub halt_reason: Option<HaltReason>,
}

impl ArchState {
    pub fn new(mem: MemSystem, entry: Word) -> Self {
        ArchState { pc: entry, regs: [0; 32], mem, halted: false, exit_code: 0, halt_reason: None }
    }

    pub fn regs(&self) -> &[Word; 32] {
        &self.regs
    }

    pub fn reg(&self, r: Reg) -> Word {
        self.regs[r.index()]
    }

    fn set_reg(&mut self, r: Reg, value: Word) {
        if !r.is_zero() {
            self.regs[r.index()] = value;
        }
    }

    fn trap(&mut self, fault: Fault) -> StepError {
        let trap = Trap { pc: self.pc, fault };
        self.halted = true;
        self.halt_reason = Some(HaltReason::Trap(trap));
        StepError::Trap(trap)
    }

    /// Executes the instruction at `pc`.
    pub fn step(&mut self) -> Result<RetireEvent, StepError> {
        if self.halted {
            return Err(StepError::AlreadyHalted);
        }
        let pc = self.pc;
        let raw = match self.mem.imem().read_now(pc, MemAccess::WORD) {
            Ok(raw) => raw,
            Err(f) => return Err(self.trap(f.into())),
        };
        let d = match isa::decode(raw) {
            Ok(d) => d,
            Err(e) => return Err(self.trap(e.into())),
        };
        let rs1 = self.reg(d.rs1);
        let rs2 = self.reg(d.rs2);
        let fallthrough = pc.wrapping_add(4);
        let mut next_pc = fallthrough;
        let mut rd_value = None;
        let mut mem_write = None;

        match d.kind {
            InstrKind::AluReg => rd_value = Some(isa::alu_eval(d.alu_op, rs1, rs2)),
            InstrKind::AluImm => rd_value = Some(isa::alu_eval(d.alu_op, rs1, d.imm)),
            InstrKind::Lui => rd_value = Some(d.imm),
            InstrKind::Auipc => rd_value = Some(pc.wrapping_add(d.imm)),
            InstrKind::Jal => {
                rd_value = Some(fallthrough);
                next_pc = pc.wrapping_add(d.imm);
            }
            InstrKind::Jalr => {
                rd_value = Some(fallthrough);
                next_pc = rs1.wrapping_add(d.imm) & !1;
            }
            InstrKind::Branch => {
                let op = d.branch_op.expect("branch carries a condition");
                if isa::branch_taken(op, rs1, rs2) {
                    next_pc = pc.wrapping_add(d.imm);
                }
            }
            InstrKind::Load => {
                let access = d.mem.expect("load carries an access");
                match self.mem.dmem().read_now(rs1.wrapping_add(d.imm), access) {
                    Ok(v) => rd_value = Some(v),
                    Err(f) => return Err(self.trap(f.into())),
                }
            }
            InstrKind::Store => {
                let width = d.mem.expect("store carries an access").width;
                let addr = rs1.wrapping_add(d.imm);
                if let Err(f) = self.mem.dmem_mut().write_now(addr, width, rs2) {
                    return Err(self.trap(f.into()));
                }
                mem_write = Some(MemWrite { addr, width, data: width.truncate(rs2) });
            }
            InstrKind::Fence => {}
            InstrKind::Ecall | InstrKind::Ebreak => {}
        }

        if !next_pc.is_multiple_of(4) {
            return Err(self.trap(MemFault::Misaligned { addr: next_pc, bytes: 4 }.into()));
        }

        let wrote_rd = match rd_value {
            Some(v) if d.writes_nonzero_rd() => {
                self.set_reg(d.rd, v);
                Some((d.rd, v))
            }
            _ => None,
        };
        self.pc = next_pc;

        match d.kind {
            InstrKind::Ecall => self.halt(HaltReason::Ecall),
            InstrKind::Ebreak => self.halt(HaltReason::Ebreak),
            _ => {}
        }

        Ok(RetireEvent { pc, raw, wrote_rd, mem_write, next_pc })
    }

    fn halt(&mut self, reason: HaltReason) {
        self.halted = true;
        self.exit_code = self.reg(Reg::A0);
        self.halt_reason = Some(reason);
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoldenRun {
    pub events: Vec<RetireEvent>,
    pub outcome: RunOutcome,
    pub state: ArchState,
}

/// Steps until the state halts or `max_steps` instructions have retired.
pub fn run(mut state: ArchState, max_steps: u64) -> GoldenRun {
    let mut events = Vec::new();
    let outcome = loop {
        if let Some(reason) = state.halt_reason {
            break RunOutcome::Halted(reason);
        }
        if events.len() as u64 >= max_steps {
            break RunOutcome::StepLimitExceeded;
        }
        match state.step() {
            Ok(ev) => events.push(ev),
            Err(StepError::Trap(t)) => break RunOutcome::Halted(HaltReason::Trap(t)),
            Err(StepError::AlreadyHalted) => unreachable!("checked above"),
        }
    };
    GoldenRun { events, outcome, state }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mem::MemSystem;

    fn state_with(words: &[u32], entry: Word) -> ArchState {
        let bytes: Vec<u8> = words.iter().flat_map(|w| w.to_le_bytes()).collect();
        let mut mem = MemSystem::split(4096, 4096).unwrap();
        mem.imem_mut().load_image(&bytes, entry as usize).unwrap();
        ArchState::new(mem, entry)
    }

    #[test]
    fn addi_writes_rd() {
        let mut s = state_with(&[0x00A0_0093], 0);
        let ev = s.step().unwrap();
        assert_eq!(s.reg(Reg::new(1).unwrap()), 10);
        assert_eq!(ev.next_pc, 4);
        assert_eq!(ev.wrote_rd, Some((Reg::new(1).unwrap(), 10)));
    }

    #[test]
    fn x0_write_is_discarded() {
        // addi x0, x0, 5
        let mut s = state_with(&[0x0050_0013], 0);
        let ev = s.step().unwrap();
        assert_eq!(s.regs()[0], 0);
        assert_eq!(ev.wrote_rd, None);
        assert_eq!(ev.next_pc, 4);
    }

    #[test]
    fn jal_links_and_jumps() {
        // jal x1, 8 at 0x100
        let mut s = state_with(&[0x0080_00EF], 0x100);
        let ev = s.step().unwrap();
        assert_eq!(s.reg(Reg::new(1).unwrap()), 0x104);
        assert_eq!(ev.next_pc, 0x108);
        assert_eq!(s.pc, 0x108);
    }

    #[test]
    fn zero_memory_is_illegal() {
        let r = run(state_with(&[], 0), 10);
        assert!(r.events.is_empty());
        assert_eq!(
            r.outcome,
            RunOutcome::Halted(HaltReason::Trap(Trap { pc: 0, fault: Fault::IllegalInstruction(0) }))
        );
        assert!(r.state.halted);
    }

    #[test]
    fn ecall_halts_with_a0() {
        // addi x1, x0, 1; addi a0, x0, 7; ecall
        let r = run(state_with(&[0x0010_0093, 0x0070_0513, 0x0000_0073], 0), 100);
        assert_eq!(r.events.len(), 3);
        assert_eq!(r.outcome, RunOutcome::Halted(HaltReason::Ecall));
        assert_eq!(r.state.exit_code, 7);
        let mut again = r.state.clone();
        assert_eq!(again.step(), Err(StepError::AlreadyHalted));
    }

    #[test]
    fn ebreak_halts_too() {
        let r = run(state_with(&[0x0010_0073], 0), 100);
        assert_eq!(r.outcome, RunOutcome::Halted(HaltReason::Ebreak));
        assert_eq!(r.events.len(), 1);
    }

    #[test]
    fn infinite_loop_hits_step_limit() {
        // beq x0, x0, 0
        let r = run(state_with(&[0x0000_0063], 0), 10);
        assert_eq!(r.events.len(), 10);
        assert_eq!(r.outcome, RunOutcome::StepLimitExceeded);
        assert!(!r.state.halted);
    }

    #[test]
    fn misaligned_jalr_target_faults() {
        // addi x5, x0, 6; jalr x1, 0(x5) -> target 6, not word aligned
        let r = run(state_with(&[0x0060_0293, 0x0002_80E7], 0), 10);
        assert_eq!(r.events.len(), 1);
        assert_eq!(
            r.outcome,
            RunOutcome::Halted(HaltReason::Trap(Trap {
                pc: 4,
                fault: Fault::Memory(MemFault::Misaligned { addr: 6, bytes: 4 })
            }))
        );
        // faulting jalr did not link
        assert_eq!(r.state.reg(Reg::new(1).unwrap()), 0);
    }

    #[test]
    fn jalr_clears_bit_zero() {
        // addi x5, x0, 9; jalr x0, 0(x5) -> 8
        let mut s = state_with(&[0x0090_0293, 0x0002_8067], 0);
        s.step().unwrap();
        let ev = s.step().unwrap();
        assert_eq!(ev.next_pc, 8);
    }

    #[test]
    fn load_store_round_trip() {
        // addi x1, x0, -1; sh x1, 6(x0); lhu x2, 6(x0); lb x3, 7(x0); ecall
        let prog = [0xFFF0_0093, 0x0010_1323, 0x0060_5103, 0x0070_0183, 0x0000_0073];
        let r = run(state_with(&prog, 0), 100);
        assert_eq!(r.outcome, RunOutcome::Halted(HaltReason::Ecall));
        assert_eq!(r.events[1].mem_write, Some(MemWrite { addr: 6, width: isa::MemWidth::Half, data: 0xffff }));
        assert_eq!(r.state.reg(Reg::new(2).unwrap()), 0xffff);
        assert_eq!(r.state.reg(Reg::new(3).unwrap()), 0xffff_ffff);
    }
}
