//! Hand-written programs that exercise each base instruction and the
//! interesting hazard shapes at least once.

use super::asm::*;
use crate::isa::{AluOp, BranchOp, MemWidth, Reg};

/// A named test program.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedProgram {
    pub name: String,
    pub program: Program,
}

const OPERANDS: [(u32, u32); 8] = [
    (5, 3),
    (3, 5),
    (0xffff_ffff, 1),
    (0x8000_0000, 0x7fff_ffff),
    (0x8000_0000, 31),
    (0x1234_5678, 0x0000_0004),
    (0, 0),
    (0xdead_beef, 0xffff_ffe1),
];

const IMMEDIATES: [i32; 6] = [0, 1, -1, 2047, -2048, 0x555];

struct Builder {
    insts: Vec<Inst>,
}

impl Builder {
    fn new() -> Self {
        Builder { insts: Vec::new() }
    }

    fn li(&mut self, rd: Reg, v: u32) -> &mut Self {
        self.insts.extend(li(rd, v));
        self
    }

    fn push(&mut self, i: Inst) -> &mut Self {
        self.insts.push(i);
        self
    }

    /// Loads `data` into the data memory at `addr` through `tmp`.
    fn store_word(&mut self, addr: i32, data: u32, tmp: Reg) -> &mut Self {
        self.li(tmp, data).push(sw(tmp, Reg::ZERO, addr))
    }

    fn exit(&mut self) -> Program {
        self.insts.push(Inst::Ecall);
        Program::new(std::mem::take(&mut self.insts))
    }
}

fn alu_name(op: AluOp) -> &'static str {
    match op {
        AluOp::Add => "add",
        AluOp::Sub => "sub",
        AluOp::Sll => "sll",
        AluOp::Slt => "slt",
        AluOp::Sltu => "sltu",
        AluOp::Xor => "xor",
        AluOp::Srl => "srl",
        AluOp::Sra => "sra",
        AluOp::Or => "or",
        AluOp::And => "and",
    }
}

fn branch_name(op: BranchOp) -> &'static str {
    match op {
        BranchOp::Beq => "beq",
        BranchOp::Bne => "bne",
        BranchOp::Blt => "blt",
        BranchOp::Bge => "bge",
        BranchOp::Bltu => "bltu",
        BranchOp::Bgeu => "bgeu",
    }
}

fn alu_reg_program(op: AluOp) -> Program {
    let mut b = Builder::new();
    for (i, &(a, c)) in OPERANDS.iter().enumerate() {
        let rd = x(3 + (i % 8) as u8 * 3);
        b.li(x(1), a).li(x(2), c);
        // the second copy reads the first result back to back
        b.push(alu(op, rd, x(1), x(2))).push(alu(op, x(31), rd, x(1)));
    }
    b.exit()
}

fn alu_imm_program(op: AluOp) -> Program {
    let mut b = Builder::new();
    let shift = matches!(op, AluOp::Sll | AluOp::Srl | AluOp::Sra);
    for (i, &(a, _)) in OPERANDS.iter().enumerate() {
        b.li(x(1), a);
        for (j, &imm) in IMMEDIATES.iter().enumerate() {
            let imm = if shift { imm & 31 } else { imm };
            let rd = x(2 + ((i * 6 + j) % 28) as u8);
            b.push(alui(op, rd, x(1), imm));
        }
        let imm = if shift { 7 } else { 3 };
        b.push(alui(op, x(31), x(31), imm));
    }
    b.exit()
}

/// Forward taken and not-taken cases, then a three-iteration backward loop.
fn branch_program(op: BranchOp) -> Program {
    let mut b = Builder::new();
    for (i, &(a, c)) in OPERANDS.iter().enumerate() {
        let marker = x(10 + i as u8);
        b.li(x(1), a).li(x(2), c);
        // skips the marker write when taken
        b.push(branch(op, x(1), x(2), 8)).push(addi(marker, Reg::ZERO, 1));
    }
    // x5 counts up to 3; each op is arranged so the loop continues while x5 < 3
    b.push(addi(x(6), Reg::ZERO, 3)).push(addi(x(5), Reg::ZERO, 0));
    b.push(addi(x(5), x(5), 1));
    match op {
        BranchOp::Beq => {
            b.push(alu(AluOp::Sltu, x(7), x(5), x(6)));
            b.push(alui(AluOp::Xor, x(7), x(7), 1));
            b.push(branch(op, x(7), Reg::ZERO, -12));
        }
        BranchOp::Bne | BranchOp::Blt | BranchOp::Bltu => {
            b.push(branch(op, x(5), x(6), -4));
        }
        BranchOp::Bge | BranchOp::Bgeu => {
            b.push(addi(x(7), x(5), 1));
            b.push(branch(op, x(6), x(7), -8));
        }
    }
    b.push(addi(x(8), x(5), 100));
    b.exit()
}

fn load_program(width: MemWidth, signed: bool) -> Program {
    let mut b = Builder::new();
    b.store_word(0x100, 0x8bad_f00d, x(1)).store_word(0x104, 0x7f80_ff01, x(1));
    let step = width.bytes() as i32;
    for (k, off) in (0x100..0x108).step_by(step as usize).enumerate() {
        let rd = x(2 + k as u8);
        b.push(Inst::Load { width, signed, rd, rs1: Reg::ZERO, offset: off });
        b.push(alu(AluOp::Add, x(31), rd, x(31)));
    }
    // register base with a negative offset
    b.li(x(29), 0x108);
    b.push(Inst::Load { width, signed, rd: x(28), rs1: x(29), offset: -step });
    b.exit()
}

fn store_program(width: MemWidth) -> Program {
    let mut b = Builder::new();
    b.li(x(1), 0xa1b2_c3d4).li(x(2), 0x200);
    let step = width.bytes() as i32;
    for (k, off) in (0..8).step_by(step as usize).enumerate() {
        b.push(addi(x(1), x(1), 0x111 * k as i32));
        b.push(Inst::Store { width, rs1: x(2), rs2: x(1), offset: off });
    }
    b.push(Inst::Store { width, rs1: x(2), rs2: x(1), offset: -step });
    b.push(lw(x(3), x(2), 0)).push(lw(x(4), x(2), 4));
    b.exit()
}

fn named(name: impl Into<String>, program: Program) -> NamedProgram {
    NamedProgram { name: name.into(), program }
}

/// Every RV32I base instruction plus hazard and trap scenarios.
pub fn directed_suite() -> Vec<NamedProgram> {
    let mut out = Vec::new();

    for op in AluOp::ALL {
        out.push(named(alu_name(op), alu_reg_program(op)));
    }
    for op in AluOp::ALL.into_iter().filter(|&op| op != AluOp::Sub) {
        out.push(named(format!("{}i", alu_name(op)), alu_imm_program(op)));
    }
    for op in BranchOp::ALL {
        out.push(named(branch_name(op), branch_program(op)));
    }
    for (name, width, signed) in [
        ("lb", MemWidth::Byte, true),
        ("lh", MemWidth::Half, true),
        ("lw", MemWidth::Word, true),
        ("lbu", MemWidth::Byte, false),
        ("lhu", MemWidth::Half, false),
    ] {
        out.push(named(name, load_program(width, signed)));
    }
    for (name, width) in [("sb", MemWidth::Byte), ("sh", MemWidth::Half), ("sw", MemWidth::Word)] {
        out.push(named(name, store_program(width)));
    }

    let mut b = Builder::new();
    for (k, imm20) in [0u32, 1, 0x80000, 0xfffff, 0x12345].into_iter().enumerate() {
        b.push(Inst::Lui { rd: x(1 + k as u8), imm20 });
    }
    b.push(addi(x(10), x(5), 0x678));
    out.push(named("lui", b.exit()));

    let mut b = Builder::new();
    for (k, imm20) in [0u32, 1, 0xfffff, 0x80000].into_iter().enumerate() {
        b.push(Inst::Auipc { rd: x(1 + k as u8), imm20 });
    }
    b.push(alu(AluOp::Add, x(10), x(4), x(1)));
    out.push(named("auipc", b.exit()));

    let mut b = Builder::new();
    b.push(Inst::Jal { rd: x(1), offset: 12 }); // 0 -> 12
    b.push(addi(x(5), Reg::ZERO, 5)); // 4, reached from 12
    b.push(Inst::Jal { rd: Reg::ZERO, offset: 12 }); // 8 -> 20
    b.push(Inst::Jal { rd: x(2), offset: -8 }); // 12 -> 4
    b.push(Inst::Jal { rd: x(3), offset: -12 }); // 16, skipped
    b.push(alu(AluOp::Add, x(6), x(1), x(2))); // 20
    out.push(named("jal", b.exit()));

    let mut b = Builder::new();
    b.push(Inst::Auipc { rd: x(7), imm20: 0 }); // 0
    b.push(Inst::Jalr { rd: x(1), rs1: x(7), offset: 17 }); // 4 -> 16 (low bit cleared)
    b.push(addi(x(5), Reg::ZERO, 5)); // 8, skipped
    b.push(Inst::Jalr { rd: Reg::ZERO, rs1: x(2), offset: 8 }); // 12 -> 28
    b.push(Inst::Jalr { rd: x(2), rs1: x(1), offset: 4 }); // 16 -> 12
    b.push(addi(x(6), Reg::ZERO, 6)); // 20, skipped
    b.push(addi(x(1), x(1), 1)); // 24, skipped
    b.push(addi(x(8), x(2), 0)); // 28
    out.push(named("jalr", b.exit()));

    let mut b = Builder::new();
    b.store_word(0x40, 7, x(1)).push(Inst::Fence).push(lw(x(2), Reg::ZERO, 0x40)).push(Inst::Fence);
    out.push(named("fence", b.exit()));

    let mut b = Builder::new();
    b.li(x(10), 42);
    out.push(named("ecall", b.exit()));

    let mut b = Builder::new();
    b.li(x(10), 7).push(Inst::Ebreak).push(addi(x(10), Reg::ZERO, 1));
    out.push(named("ebreak", b.exit()));

    // hazards
    let mut b = Builder::new();
    b.store_word(0x80, 0x11, x(1)).store_word(0x84, 0x84, x(1));
    b.push(lw(x(2), Reg::ZERO, 0x80)).push(alu(AluOp::Add, x(3), x(2), x(2)));
    b.push(lw(x(4), Reg::ZERO, 0x84)).push(lw(x(5), x(4), 0));
    b.push(lw(x(6), Reg::ZERO, 0x80)).push(sw(x(6), Reg::ZERO, 0x88));
    b.push(lw(x(7), Reg::ZERO, 0x80)).push(branch(BranchOp::Bne, x(7), Reg::ZERO, 8));
    b.push(addi(x(8), Reg::ZERO, 1));
    b.push(lw(x(9), Reg::ZERO, 0x84)).push(Inst::Jalr { rd: x(1), rs1: x(9), offset: -0x84 + 4 * 40 });
    // padding up to the jump target
    while b.insts.len() < 40 {
        b.push(addi(x(30), Reg::ZERO, -1));
    }
    out.push(named("load_use_kinds", b.exit()));

    let mut b = Builder::new();
    b.li(x(1), 0x1234_5678).push(sw(x(1), Reg::ZERO, 0x10)).push(lw(x(2), Reg::ZERO, 0x10));
    b.push(Inst::Store { width: MemWidth::Byte, rs1: Reg::ZERO, rs2: x(1), offset: 0x11 });
    b.push(Inst::Load { width: MemWidth::Half, signed: true, rd: x(3), rs1: Reg::ZERO, offset: 0x10 });
    b.push(Inst::Load { width: MemWidth::Byte, signed: false, rd: x(4), rs1: Reg::ZERO, offset: 0x11 });
    out.push(named("store_then_load", b.exit()));

    let mut b = Builder::new();
    b.push(addi(x(1), Reg::ZERO, 1));
    for k in 2..20 {
        b.push(alu(AluOp::Add, x(k), x(k - 1), x(k - 1)));
    }
    out.push(named("dependency_chain", b.exit()));

    let mut b = Builder::new();
    b.push(addi(x(1), Reg::ZERO, 1)).push(addi(x(2), Reg::ZERO, 2)).push(addi(x(3), Reg::ZERO, 3));
    // producers at distance 1, 2 and 3 on both operands
    b.push(alu(AluOp::Add, x(4), x(3), x(2)));
    b.push(alu(AluOp::Sub, x(5), x(2), x(3)));
    b.push(alu(AluOp::Sll, x(6), x(4), x(5)));
    b.push(alu(AluOp::Or, x(7), x(6), x(4)));
    b.push(alu(AluOp::Xor, x(8), x(5), x(5)));
    // youngest writer wins
    b.push(addi(x(9), Reg::ZERO, 1)).push(addi(x(9), Reg::ZERO, 2)).push(addi(x(10), x(9), 0));
    out.push(named("bypass_distances", b.exit()));

    let mut b = Builder::new();
    b.push(addi(x(1), Reg::ZERO, 0x300)).push(sw(x(1), x(1), 0)).push(addi(x(2), x(1), 4));
    b.push(sw(x(2), x(2), 0)).push(lw(x(3), x(1), 4));
    out.push(named("store_address_bypass", b.exit()));

    let mut b = Builder::new();
    b.push(addi(x(1), Reg::ZERO, 1));
    b.push(branch(BranchOp::Bne, x(1), Reg::ZERO, 8)).push(addi(x(2), Reg::ZERO, 1));
    b.push(Inst::Jal { rd: x(3), offset: 8 }).push(addi(x(2), Reg::ZERO, 2));
    b.push(branch(BranchOp::Beq, x(3), Reg::ZERO, 8)).push(addi(x(4), x(3), 0));
    out.push(named("back_to_back_control", b.exit()));

    out.push(named("x0_writes", x0_program()));

    // traps
    let mut b = Builder::new();
    b.push(addi(x(1), Reg::ZERO, 1)).push(Inst::Raw(0x4010_9093)).push(addi(x(2), Reg::ZERO, 2));
    out.push(named("illegal_instruction", b.exit()));
    let mut b = Builder::new();
    b.push(addi(x(1), Reg::ZERO, 2)).push(lw(x(2), x(1), 0)).push(addi(x(3), Reg::ZERO, 3));
    out.push(named("misaligned_load", b.exit()));
    let mut b = Builder::new();
    b.li(x(1), 0x0010_0000).push(sw(x(1), x(1), 0)).push(addi(x(3), Reg::ZERO, 3));
    out.push(named("out_of_range_store", b.exit()));
    let mut b = Builder::new();
    b.push(addi(x(1), Reg::ZERO, 6)).push(Inst::Jalr { rd: x(5), rs1: x(1), offset: 0 });
    out.push(named("misaligned_jump", b.exit()));
    let mut b = Builder::new();
    b.push(addi(x(1), Reg::ZERO, 1)).push(Inst::Jal { rd: x(1), offset: 0x2_0000 });
    out.push(named("fetch_out_of_range", b.exit()));

    out
}

/// Writes `x0` through every instruction kind that has a destination.
pub fn x0_program() -> Program {
    let z = Reg::ZERO;
    let mut b = Builder::new();
    b.store_word(0x20, 0xffff_ffff, x(1));
    b.push(Inst::Lui { rd: z, imm20: 0xfffff });
    b.push(Inst::Auipc { rd: z, imm20: 0xfffff });
    b.push(addi(z, Reg::ZERO, -1));
    b.push(alu(AluOp::Add, x(2), z, z));
    for op in AluOp::ALL {
        b.push(alu(op, z, x(1), x(1)));
        if op != AluOp::Sub {
            let imm = if matches!(op, AluOp::Sll | AluOp::Srl | AluOp::Sra) { 1 } else { -1 };
            b.push(alui(op, z, x(1), imm));
        }
        b.push(alu(AluOp::Or, x(3), z, x(3)));
    }
    for (width, signed) in [
        (MemWidth::Byte, true),
        (MemWidth::Half, true),
        (MemWidth::Word, true),
        (MemWidth::Byte, false),
        (MemWidth::Half, false),
    ] {
        b.push(Inst::Load { width, signed, rd: z, rs1: Reg::ZERO, offset: 0x20 });
        b.push(alu(AluOp::Add, x(4), z, x(4)));
    }
    b.push(Inst::Jal { rd: z, offset: 4 });
    b.push(Inst::Auipc { rd: x(5), imm20: 0 });
    b.push(Inst::Jalr { rd: z, rs1: x(5), offset: 8 });
    b.push(addi(x(6), z, 1));
    b.push(sw(z, Reg::ZERO, 0x24)).push(addi(x(10), z, 0));
    b.exit()
}
