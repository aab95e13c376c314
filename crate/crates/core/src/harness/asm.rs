//! A minimal RV32I encoder for generated test programs.
//!
//! Encodings are packed from literal field layouts and do not share code
//! with the decoder, so round-tripping through both checks each side.

use crate::isa::{AluOp, BranchOp, MemWidth, Reg, Word};

/// Shorthand for register `x{n}`.
pub const fn x(n: u8) -> Reg {
    match Reg::new(n) {
        Some(r) => r,
        None => panic!("register index out of range"),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Inst {
    Lui {
        rd: Reg,
        imm20: u32,
    },
    Auipc {
        rd: Reg,
        imm20: u32,
    },
    Jal {
        rd: Reg,
        offset: i32,
    },
    Jalr {
        rd: Reg,
        rs1: Reg,
        offset: i32,
    },
    Branch {
        op: BranchOp,
        rs1: Reg,
        rs2: Reg,
        offset: i32,
    },
    Load {
        width: MemWidth,
        signed: bool,
        rd: Reg,
        rs1: Reg,
        offset: i32,
    },
    Store {
        width: MemWidth,
        rs1: Reg,
        rs2: Reg,
        offset: i32,
    },
    AluImm {
        op: AluOp,
        rd: Reg,
        rs1: Reg,
        imm: i32,
    },
    AluReg {
        op: AluOp,
        rd: Reg,
        rs1: Reg,
        rs2: Reg,
    },
    Fence,
    Ecall,
    Ebreak,
    /// An arbitrary word, for illegal encodings.
    Raw(Word),
}

fn r(reg: Reg) -> u32 {
    reg.index() as u32
}

fn i_type(imm: i32, rs1: Reg, f3: u32, rd: Reg, op: u32) -> u32 {
    assert!((-2048..2048).contains(&imm), "I immediate {imm} out of range");
    ((imm as u32 & 0xfff) << 20) | r(rs1) << 15 | f3 << 12 | r(rd) << 7 | op
}

fn s_type(imm: i32, rs2: Reg, rs1: Reg, f3: u32) -> u32 {
    assert!((-2048..2048).contains(&imm), "S immediate {imm} out of range");
    let v = imm as u32 & 0xfff;
    (v >> 5) << 25 | r(rs2) << 20 | r(rs1) << 15 | f3 << 12 | (v & 0x1f) << 7 | 0x23
}

fn b_type(offset: i32, rs2: Reg, rs1: Reg, f3: u32) -> u32 {
    assert!((-4096..4096).contains(&offset) && offset % 2 == 0, "B offset {offset} out of range");
    let v = offset as u32 & 0x1fff;
    ((v >> 12) & 1) << 31
        | ((v >> 5) & 0x3f) << 25
        | r(rs2) << 20
        | r(rs1) << 15
        | f3 << 12
        | ((v >> 1) & 0xf) << 8
        | ((v >> 11) & 1) << 7
        | 0x63
}

fn j_type(offset: i32, rd: Reg) -> u32 {
    assert!((-(1 << 20)..(1 << 20)).contains(&offset) && offset % 2 == 0, "J offset {offset} out of range");
    let v = offset as u32 & 0x1f_ffff;
    ((v >> 20) & 1) << 31
        | ((v >> 1) & 0x3ff) << 21
        | ((v >> 11) & 1) << 20
        | ((v >> 12) & 0xff) << 12
        | r(rd) << 7
        | 0x6f
}

impl Inst {
    pub fn encode(&self) -> Word {
        match *self {
            Inst::Lui { rd, imm20 } => (imm20 & 0xf_ffff) << 12 | r(rd) << 7 | 0x37,
            Inst::Auipc { rd, imm20 } => (imm20 & 0xf_ffff) << 12 | r(rd) << 7 | 0x17,
            Inst::Jal { rd, offset } => j_type(offset, rd),
            Inst::Jalr { rd, rs1, offset } => i_type(offset, rs1, 0, rd, 0x67),
            Inst::Branch { op, rs1, rs2, offset } => {
                let f3 = match op {
                    BranchOp::Beq => 0,
                    BranchOp::Bne => 1,
                    BranchOp::Blt => 4,
                    BranchOp::Bge => 5,
                    BranchOp::Bltu => 6,
                    BranchOp::Bgeu => 7,
                };
                b_type(offset, rs2, rs1, f3)
            }
            Inst::Load { width, signed, rd, rs1, offset } => {
                let f3 = match (width, signed) {
                    (MemWidth::Byte, true) => 0,
                    (MemWidth::Half, true) => 1,
                    (MemWidth::Word, _) => 2,
                    (MemWidth::Byte, false) => 4,
                    (MemWidth::Half, false) => 5,
                };
                i_type(offset, rs1, f3, rd, 0x03)
            }
            Inst::Store { width, rs1, rs2, offset } => {
                let f3 = match width {
                    MemWidth::Byte => 0,
                    MemWidth::Half => 1,
                    MemWidth::Word => 2,
                };
                s_type(offset, rs2, rs1, f3)
            }
            Inst::AluImm { op, rd, rs1, imm } => match op {
                AluOp::Sll | AluOp::Srl | AluOp::Sra => {
                    assert!((0..32).contains(&imm), "shift amount {imm} out of range");
                    let (f3, f7) = match op {
                        AluOp::Sll => (1, 0),
                        AluOp::Srl => (5, 0),
                        _ => (5, 0x20),
                    };
                    f7 << 25 | (imm as u32) << 20 | r(rs1) << 15 | f3 << 12 | r(rd) << 7 | 0x13
                }
                AluOp::Sub => panic!("there is no subi"),
                _ => {
                    let f3 = match op {
                        AluOp::Add => 0,
                        AluOp::Slt => 2,
                        AluOp::Sltu => 3,
                        AluOp::Xor => 4,
                        AluOp::Or => 6,
                        _ => 7,
                    };
                    i_type(imm, rs1, f3, rd, 0x13)
                }
            },
            Inst::AluReg { op, rd, rs1, rs2 } => {
                let (f3, f7) = match op {
                    AluOp::Add => (0, 0),
                    AluOp::Sub => (0, 0x20),
                    AluOp::Sll => (1, 0),
                    AluOp::Slt => (2, 0),
                    AluOp::Sltu => (3, 0),
                    AluOp::Xor => (4, 0),
                    AluOp::Srl => (5, 0),
                    AluOp::Sra => (5, 0x20),
                    AluOp::Or => (6, 0),
                    AluOp::And => (7, 0),
                };
                f7 << 25 | r(rs2) << 20 | r(rs1) << 15 | f3 << 12 | r(rd) << 7 | 0x33
            }
            Inst::Fence => 0x0ff0_000f,
            Inst::Ecall => 0x0000_0073,
            Inst::Ebreak => 0x0010_0073,
            Inst::Raw(w) => w,
        }
    }

    /// Destination register written by this instruction, if any.
    pub fn dest(&self) -> Option<Reg> {
        match *self {
            Inst::Lui { rd, .. }
            | Inst::Auipc { rd, .. }
            | Inst::Jal { rd, .. }
            | Inst::Jalr { rd, .. }
            | Inst::Load { rd, .. }
            | Inst::AluImm { rd, .. }
            | Inst::AluReg { rd, .. } => Some(rd),
            _ => None,
        }
    }

    /// Source registers read by this instruction.
    pub fn sources(&self) -> Vec<Reg> {
        match *self {
            Inst::Jalr { rs1, .. } | Inst::Load { rs1, .. } | Inst::AluImm { rs1, .. } => vec![rs1],
            Inst::Branch { rs1, rs2, .. } | Inst::Store { rs1, rs2, .. } | Inst::AluReg { rs1, rs2, .. } => {
                vec![rs1, rs2]
            }
            _ => vec![],
        }
    }
}

pub fn addi(rd: Reg, rs1: Reg, imm: i32) -> Inst {
    Inst::AluImm { op: AluOp::Add, rd, rs1, imm }
}

pub fn alu(op: AluOp, rd: Reg, rs1: Reg, rs2: Reg) -> Inst {
    Inst::AluReg { op, rd, rs1, rs2 }
}

pub fn alui(op: AluOp, rd: Reg, rs1: Reg, imm: i32) -> Inst {
    Inst::AluImm { op, rd, rs1, imm }
}

pub fn lw(rd: Reg, rs1: Reg, offset: i32) -> Inst {
    Inst::Load { width: MemWidth::Word, signed: true, rd, rs1, offset }
}

pub fn sw(rs2: Reg, rs1: Reg, offset: i32) -> Inst {
    Inst::Store { width: MemWidth::Word, rs1, rs2, offset }
}

pub fn branch(op: BranchOp, rs1: Reg, rs2: Reg, offset: i32) -> Inst {
    Inst::Branch { op, rs1, rs2, offset }
}

/// Loads an arbitrary 32-bit constant (one or two instructions).
pub fn li(rd: Reg, value: u32) -> Vec<Inst> {
    let v = value as i32;
    if (-2048..2048).contains(&v) {
        return vec![addi(rd, Reg::ZERO, v)];
    }
    let lo = ((value & 0xfff) as i32) << 20 >> 20;
    let hi = value.wrapping_sub(lo as u32) >> 12;
    let mut out = vec![Inst::Lui { rd, imm20: hi }];
    if lo != 0 {
        out.push(addi(rd, rd, lo));
    }
    out
}

/// A flat program starting at address 0 of the instruction memory.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Program {
    pub insts: Vec<Inst>,
}

impl Program {
    pub fn new(insts: Vec<Inst>) -> Self {
        Program { insts }
    }

    pub fn words(&self) -> Vec<Word> {
        self.insts.iter().map(Inst::encode).collect()
    }

    /// Little-endian flat binary.
    pub fn image(&self) -> Vec<u8> {
        self.insts.iter().flat_map(|i| i.encode().to_le_bytes()).collect()
    }

    pub fn len(&self) -> usize {
        self.insts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.insts.is_empty()
    }
}

impl FromIterator<Inst> for Program {
    fn from_iter<T: IntoIterator<Item = Inst>>(iter: T) -> Self {
        Program { insts: iter.into_iter().collect() }
    }
}
