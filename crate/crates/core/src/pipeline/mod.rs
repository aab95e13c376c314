//! Cycle-accurate in-order pipeline with three organizations.
//!
//! | stages | IF | ID                 | EX               | MEM         | WB |
//! |--------|----|--------------------|------------------|-------------|----|
//! | 3      | ✓  | decode, addr adder | ALU + mem + wb   |             |    |
//! | 4      | ✓  | decode             | ALU, address     | mem + wb    |    |
//! | 5      | ✓  | decode             | ALU, address     | mem         | wb |
//!
//! Instruction and data memories are synchronous: the request is registered
//! at the end of the stage that computes the address and the data is
//! consumed by the next stage. Branches and jumps resolve in EX and flush
//! the two younger instructions. The register file forwards a write to a
//! read in the same cycle.
//!
//! Each cycle is evaluated oldest stage first, so a stage always sees the
//! current-cycle outputs of the stages ahead of it and the previous-cycle
//! contents of its own input register.

mod forward;
mod hazard;
mod report;

pub use forward::{forward_select, operand_select, resolve, ForwardSel, Producer};
pub use hazard::{compute_mem_addr_in_id, detect_load_use, resolve_redirect, Redirect};
pub use report::{CycleReport, Occupancy, PerfCounters};

use std::fmt;

use serde::Serialize;

use crate::event::{Fault, HaltReason, MemWrite, RetireEvent, RunOutcome, StepError, Trap};
use crate::isa::{self, DecodedInstr, InstrKind, MemAccess, Reg, Word};
use crate::mem::{MemFault, MemPort, MemRequest, MemSystem, PortKind, Scratchpad};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum PipelineConfig {
    Three,
    Four,
    Five,
}

impl PipelineConfig {
    pub const ALL: [PipelineConfig; 3] = [PipelineConfig::Three, PipelineConfig::Four, PipelineConfig::Five];

    pub const fn stages(self) -> u32 {
        match self {
            PipelineConfig::Three => 3,
            PipelineConfig::Four => 4,
            PipelineConfig::Five => 5,
        }
    }

    pub const fn from_stages(n: u32) -> Option<Self> {
        match n {
            3 => Some(PipelineConfig::Three),
            4 => Some(PipelineConfig::Four),
            5 => Some(PipelineConfig::Five),
            _ => None,
        }
    }

    pub const fn stage_names(self) -> &'static [&'static str] {
        match self {
            PipelineConfig::Three => &["IF", "ID", "EX"],
            PipelineConfig::Four => &["IF", "ID", "EX", "MEM"],
            PipelineConfig::Five => &["IF", "ID", "EX", "MEM", "WB"],
        }
    }
}

impl fmt::Display for PipelineConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-stage", self.stages())
    }
}

/// Contents of a pipeline register from ID/EX onwards.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StageSlot {
    /// Holds a real instruction.
    pub valid: bool,
    pub is_bubble: bool,
    pub pc: Word,
    pub instr: DecodedInstr,
    /// Register operands, updated by forwarding.
    pub rs1_value: Word,
    pub rs2_value: Word,
    pub operand_a: Word,
    pub operand_b: Word,
    pub alu_result: Word,
    pub mem_addr: Word,
    pub store_data: Word,
    pub load_data: Word,
    pub next_pc: Word,
    pub fault: Option<Fault>,
    /// A data-memory request was issued for this instruction.
    pub mem_issued: bool,
}

impl StageSlot {
    pub const fn empty() -> Self {
        StageSlot {
            valid: false,
            is_bubble: false,
            pc: 0,
            instr: DecodedInstr::nop(),
            rs1_value: 0,
            rs2_value: 0,
            operand_a: 0,
            operand_b: 0,
            alu_result: 0,
            mem_addr: 0,
            store_data: 0,
            load_data: 0,
            next_pc: 0,
            fault: None,
            mem_issued: false,
        }
    }

    pub const fn bubble() -> Self {
        StageSlot { is_bubble: true, ..Self::empty() }
    }

    /// A freshly decoded instruction entering the pipeline.
    pub const fn issue(pc: Word, instr: DecodedInstr) -> Self {
        StageSlot { valid: true, pc, instr, next_pc: pc.wrapping_add(4), ..Self::empty() }
    }

    pub const fn is_live(&self) -> bool {
        self.valid && !self.is_bubble
    }

    /// Value destined for `rd`.
    pub const fn result(&self) -> Word {
        if self.instr.is_load() {
            self.load_data
        } else {
            self.alu_result
        }
    }

    /// Halts the machine once it reaches the final stage.
    pub const fn halts(&self) -> bool {
        self.is_live() && (self.fault.is_some() || self.instr.is_halt())
    }

    fn occupancy(&self) -> Occupancy {
        if self.is_bubble {
            Occupancy::Bubble
        } else if self.valid {
            Occupancy::Instr(self.pc)
        } else {
            Occupancy::Empty
        }
    }
}

/// IF/ID register: the fetched word before decode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Fetched {
    Empty,
    Bubble,
    Word { pc: Word, raw: Result<Word, MemFault> },
}

/// Test hooks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PipelineOptions {
    /// Ignore one bypass source, as if the wire were cut.
    pub disabled_bypass: Option<ForwardSel>,
}

#[derive(Clone, Debug)]
pub struct Pipeline {
    config: PipelineConfig,
    options: PipelineOptions,
    fetch_pc: Word,
    if_id: Fetched,
    id_ex: StageSlot,
    ex_mem: StageSlot,
    mem_wb: StageSlot,
    /// Register-file write port register (three and four stages): the result
    /// retired last cycle, written to the array this cycle.
    wb_reg: Option<(Reg, Word)>,
    regfile: [Word; 32],
    counters: PerfCounters,
    mem: MemSystem,
    imem_port: MemPort,
    dmem_port: MemPort,
    halt: Option<HaltReason>,
    exit_code: Word,
}

/// Result of [`Pipeline::run`].
#[derive(Clone, Debug, PartialEq)]
pub struct PipelineRun {
    pub events: Vec<RetireEvent>,
    pub outcome: RunOutcome,
    pub counters: PerfCounters,
}

impl Pipeline {
    pub fn new(config: PipelineConfig, mem: MemSystem, entry: Word) -> Self {
        Self::with_options(config, mem, entry, PipelineOptions::default())
    }

    pub fn with_options(config: PipelineConfig, mem: MemSystem, entry: Word, options: PipelineOptions) -> Self {
        let mut p = Pipeline {
            config,
            options,
            fetch_pc: entry,
            if_id: Fetched::Empty,
            id_ex: StageSlot::empty(),
            ex_mem: StageSlot::empty(),
            mem_wb: StageSlot::empty(),
            wb_reg: None,
            regfile: [0; 32],
            counters: PerfCounters::default(),
            mem,
            imem_port: MemPort::new(PortKind::Instruction),
            dmem_port: MemPort::new(PortKind::Data),
            halt: None,
            exit_code: 0,
        };
        // reset presents the entry address to the instruction memory
        p.issue_fetch();
        p.imem_port.clock(p.mem.imem_mut());
        p
    }

    pub fn config(&self) -> PipelineConfig {
        self.config
    }

    pub fn counters(&self) -> &PerfCounters {
        &self.counters
    }

    pub fn regs(&self) -> &[Word; 32] {
        &self.regfile
    }

    pub fn mem(&self) -> &MemSystem {
        &self.mem
    }

    pub fn halt_reason(&self) -> Option<HaltReason> {
        self.halt
    }

    pub fn exit_code(&self) -> Word {
        self.exit_code
    }

    /// Number of pipeline registers between stages.
    pub fn live_stage_registers(&self) -> usize {
        self.config.stages() as usize - 1
    }

    fn write_reg(&mut self, rd: Reg, value: Word) {
        if !rd.is_zero() {
            self.regfile[rd.index()] = value;
        }
    }

    fn occupancy(&self) -> Vec<Occupancy> {
        let id = match self.if_id {
            Fetched::Empty => Occupancy::Empty,
            Fetched::Bubble => Occupancy::Bubble,
            Fetched::Word { pc, .. } => Occupancy::Instr(pc),
        };
        let mut occ = vec![Occupancy::Instr(self.fetch_pc), id, self.id_ex.occupancy()];
        if self.config >= PipelineConfig::Four {
            occ.push(self.ex_mem.occupancy());
        }
        if self.config == PipelineConfig::Five {
            occ.push(self.mem_wb.occupancy());
        }
        occ
    }

    fn issue_fetch(&mut self) {
        self.imem_port.issue(MemRequest::read(self.fetch_pc, MemAccess::WORD)).expect("one fetch per cycle");
    }

    fn issue_data(&mut self, slot: &mut StageSlot) {
        let Some(access) = slot.instr.mem else { return };
        let req = if slot.instr.is_store() {
            MemRequest::write(slot.mem_addr, access.width, slot.store_data)
        } else {
            MemRequest::read(slot.mem_addr, access)
        };
        self.dmem_port.issue(req).expect("one data access per cycle");
        slot.mem_issued = true;
    }

    /// Consumes the data-memory response for `slot`.
    fn collect_data(&mut self, slot: &mut StageSlot) {
        if !slot.mem_issued {
            return;
        }
        let dmem: &Scratchpad = self.mem.dmem();
        match self.dmem_port.collect(dmem).expect("response for an issued request") {
            Ok(v) if slot.instr.is_load() => slot.load_data = v,
            Ok(_) => {}
            Err(f) => slot.fault = Some(f.into()),
        }
    }

    /// Commits the final-stage occupant. Returns the halt reason if the
    /// machine stops at this instruction.
    fn retire(&mut self, slot: StageSlot, report: &mut CycleReport) -> Option<HaltReason> {
        if !slot.is_live() {
            return None;
        }
        if let Some(fault) = slot.fault {
            return Some(HaltReason::Trap(Trap { pc: slot.pc, fault }));
        }
        debug_assert!(!slot.instr.is_load() && !slot.instr.is_store() || slot.mem_issued);
        let d = &slot.instr;
        let wrote_rd = d.writes_nonzero_rd().then(|| (d.rd, slot.result()));
        let mem_write = d.is_store().then(|| {
            let width = d.mem.expect("store carries an access").width;
            MemWrite { addr: slot.mem_addr, width, data: width.truncate(slot.store_data) }
        });
        if let Some((rd, v)) = wrote_rd {
            match self.config {
                PipelineConfig::Five => self.write_reg(rd, v),
                _ => self.wb_reg = Some((rd, v)),
            }
        }
        self.counters.retired += 1;
        report.retired = Some(RetireEvent { pc: slot.pc, raw: d.raw, wrote_rd, mem_write, next_pc: slot.next_pc });
        match d.kind {
            InstrKind::Ecall => Some(HaltReason::Ecall),
            InstrKind::Ebreak => Some(HaltReason::Ebreak),
            _ => None,
        }
    }

    fn finish(&mut self, reason: HaltReason, mut report: CycleReport) -> CycleReport {
        if let Some((rd, v)) = self.wb_reg.take() {
            self.write_reg(rd, v);
        }
        if reason.is_ok() {
            self.exit_code = self.regfile[Reg::A0.index()];
        }
        self.halt = Some(reason);
        report.halt = Some(reason);
        report
    }

    fn bypass(&self, p: Option<Producer>) -> Option<Producer> {
        p.filter(|p| Some(p.sel) != self.options.disabled_bypass)
    }

    /// EX-stage datapath: forwarding, operand muxes, ALU and branch unit.
    fn execute(&self, slot: &mut StageSlot, producers: &[Producer], report: &mut CycleReport) -> Option<Redirect> {
        let regs = forward_select(self.config, &slot.instr, producers);
        slot.rs1_value = resolve(regs[0], producers, slot.rs1_value);
        slot.rs2_value = resolve(regs[1], producers, slot.rs2_value);
        let sel = operand_select(&slot.instr, regs);
        report.ex_operands = Some(sel);

        let pick = |s: ForwardSel, reg_value: Word| match s {
            ForwardSel::Pc => slot.pc,
            ForwardSel::Immediate => slot.instr.imm,
            _ => reg_value,
        };
        slot.operand_a = pick(sel[0], slot.rs1_value);
        slot.operand_b = pick(sel[1], slot.rs2_value);
        slot.alu_result = match slot.instr.kind {
            InstrKind::Jal | InstrKind::Jalr => slot.pc.wrapping_add(4),
            _ => isa::alu_eval(slot.instr.alu_op, slot.operand_a, slot.operand_b),
        };

        if !slot.instr.is_control_transfer() {
            return None;
        }
        match resolve_redirect(slot) {
            Ok(r) => {
                slot.next_pc = r.target;
                report.redirect = Some(r);
                r.taken.then_some(r)
            }
            Err(f) => {
                slot.fault = Some(f.into());
                None
            }
        }
    }

    /// Advances the machine by one clock cycle.
    pub fn step_cycle(&mut self) -> Result<CycleReport, StepError> {
        if self.halt.is_some() {
            return Err(StepError::AlreadyHalted);
        }
        let config = self.config;
        self.counters.cycles += 1;
        let mut report = CycleReport {
            cycle: self.counters.cycles,
            occupancy: self.occupancy(),
            retired: None,
            stalled: false,
            redirect: None,
            ex_operands: None,
            halt: None,
        };

        // Write-back register lands in the array; visible to ID this cycle.
        let wb_sel = match config {
            PipelineConfig::Three => ForwardSel::FromExWb3Stage,
            _ => ForwardSel::FromMemWb,
        };
        let landed = self.wb_reg.take().map(|(rd, value)| Producer { sel: wb_sel, rd, value });
        if let Some(p) = landed {
            self.write_reg(p.rd, p.value);
        }
        let landed = self.bypass(landed);

        // WB
        let mut wb_producer = None;
        if config == PipelineConfig::Five {
            let slot = std::mem::replace(&mut self.mem_wb, StageSlot::empty());
            wb_producer = self.bypass(Producer::from_slot(&slot, ForwardSel::FromMemWb));
            if let Some(h) = self.retire(slot, &mut report) {
                return Ok(self.finish(h, report));
            }
        }

        // MEM
        let mut mem_producer = None;
        let mut older_halting = false;
        if config >= PipelineConfig::Four {
            let mut slot = std::mem::replace(&mut self.ex_mem, StageSlot::empty());
            if slot.is_live() {
                self.collect_data(&mut slot);
                // loaded data is never forwarded from MEM; the interlock covers it
                if !slot.instr.is_load() {
                    mem_producer = self.bypass(Producer::from_slot(&slot, ForwardSel::FromExMem));
                }
            }
            if config == PipelineConfig::Four {
                if let Some(h) = self.retire(slot, &mut report) {
                    return Ok(self.finish(h, report));
                }
            } else {
                older_halting = slot.halts();
                self.mem_wb = slot;
            }
        }

        // EX
        let mut ex = std::mem::replace(&mut self.id_ex, StageSlot::empty());
        let mut redirect = None;
        if ex.is_live() && ex.fault.is_none() {
            let producers: Vec<Producer> = match config {
                PipelineConfig::Three => [landed].into_iter().flatten().collect(),
                PipelineConfig::Four => [mem_producer, landed].into_iter().flatten().collect(),
                PipelineConfig::Five => [mem_producer, wb_producer].into_iter().flatten().collect(),
            };
            redirect = self.execute(&mut ex, &producers, &mut report);
            if config == PipelineConfig::Three {
                self.collect_data(&mut ex);
            } else if ex.instr.mem.is_some() && ex.fault.is_none() && !older_halting {
                ex.mem_addr = ex.alu_result;
                ex.store_data = ex.rs2_value;
                self.issue_data(&mut ex);
            }
        }
        let ex_producer = (config == PipelineConfig::Three)
            .then(|| self.bypass(Producer::from_slot(&ex, ForwardSel::FromExWb3Stage)))
            .flatten();
        if config == PipelineConfig::Three {
            if let Some(h) = self.retire(ex, &mut report) {
                return Ok(self.finish(h, report));
            }
        } else {
            self.ex_mem = ex;
        }

        // ID
        let mut stall = false;
        if redirect.is_some() {
            self.id_ex = StageSlot::bubble();
        } else {
            self.id_ex = match self.if_id {
                Fetched::Empty => StageSlot::empty(),
                Fetched::Bubble => StageSlot::bubble(),
                Fetched::Word { pc, raw } => {
                    let decoded = raw.map_err(Fault::from).and_then(|w| isa::decode(w).map_err(Fault::from));
                    let mut slot = match decoded {
                        Ok(d) => StageSlot::issue(pc, d),
                        Err(f) => StageSlot { fault: Some(f), ..StageSlot::issue(pc, DecodedInstr::nop()) },
                    };
                    slot.rs1_value = self.regfile[slot.instr.rs1.index()];
                    slot.rs2_value = self.regfile[slot.instr.rs2.index()];
                    stall = config != PipelineConfig::Three && detect_load_use(config, &slot.instr, &self.ex_mem);
                    if stall {
                        StageSlot::bubble()
                    } else {
                        if config == PipelineConfig::Three && slot.instr.mem.is_some() && slot.fault.is_none() {
                            self.id_address_and_access(&mut slot, ex_producer);
                        }
                        slot
                    }
                }
            };
        }

        // IF
        let fetched = self.imem_port.collect(self.mem.imem()).expect("a fetch is always in flight");
        if let Some(r) = redirect {
            self.if_id = Fetched::Bubble;
            self.fetch_pc = r.target;
            self.counters.taken_branch_flushes += 2;
        } else if stall {
            self.counters.load_use_stalls += 1;
            report.stalled = true;
        } else {
            self.if_id = Fetched::Word { pc: self.fetch_pc, raw: fetched };
            self.fetch_pc = self.fetch_pc.wrapping_add(4);
        }
        self.issue_fetch();

        match &mut self.mem {
            MemSystem::Split { imem, dmem } => {
                self.imem_port.clock(imem);
                self.dmem_port.clock(dmem);
            }
            MemSystem::Unified(m) => {
                self.imem_port.clock(m);
                self.dmem_port.clock(m);
            }
        }
        Ok(report)
    }

    /// Three stages: effective address from the dedicated adder, with the
    /// combinational EX result bypassed to the address and store-data inputs,
    /// then the request is registered into the data memory.
    fn id_address_and_access(&mut self, slot: &mut StageSlot, ex_result: Option<Producer>) {
        let producers: Vec<Producer> = ex_result.into_iter().collect();
        let regs = forward_select(self.config, &slot.instr, &producers);
        slot.rs1_value = resolve(regs[0], &producers, slot.rs1_value);
        slot.rs2_value = resolve(regs[1], &producers, slot.rs2_value);
        slot.mem_addr = compute_mem_addr_in_id(slot);
        slot.store_data = slot.rs2_value;
        self.issue_data(slot);
    }

    /// Cycles until halt or `max_cycles`, handing every report to `on_cycle`.
    pub fn run(&mut self, max_cycles: u64, mut on_cycle: impl FnMut(&CycleReport)) -> PipelineRun {
        let mut events = Vec::new();
        let outcome = loop {
            if let Some(h) = self.halt {
                break RunOutcome::Halted(h);
            }
            if self.counters.cycles >= max_cycles {
                break RunOutcome::StepLimitExceeded;
            }
            let report = self.step_cycle().expect("not halted");
            on_cycle(&report);
            if let Some(ev) = report.retired {
                events.push(ev);
            }
        };
        PipelineRun { events, outcome, counters: self.counters }
    }
}
