//! RV32I base instruction set: decoding, immediate generation, ALU and
//! branch-condition evaluation.
//!
//! Everything in here is a pure function over value types and is shared by
//! the golden model and all three pipeline organizations.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// A 32-bit machine word. Arithmetic on words wraps modulo 2^32.
pub type Word = u32;

/// Major opcodes and function codes of the RV32I base encoding.
pub mod opcode {
    pub const LUI: u32 = 0b011_0111;
    pub const AUIPC: u32 = 0b001_0111;
    pub const JAL: u32 = 0b110_1111;
    pub const JALR: u32 = 0b110_0111;
    pub const BRANCH: u32 = 0b110_0011;
    pub const LOAD: u32 = 0b000_0011;
    pub const STORE: u32 = 0b010_0011;
    pub const OP_IMM: u32 = 0b001_0011;
    pub const OP: u32 = 0b011_0011;
    pub const MISC_MEM: u32 = 0b000_1111;
    pub const SYSTEM: u32 = 0b111_0011;

    pub const ECALL: u32 = 0x0000_0073;
    pub const EBREAK: u32 = 0x0010_0073;

    /// `addi x0, x0, 0`
    pub const NOP: u32 = 0x0000_0013;

    pub const FUNCT7_ALT: u32 = 0b010_0000;
}

/// Register index in `[0, 31]`. `x0` is hardwired to zero.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Reg(u8);

impl Reg {
    pub const ZERO: Reg = Reg(0);
    /// Return-value / exit-code register `a0`.
    pub const A0: Reg = Reg(10);

    pub const fn new(index: u8) -> Option<Reg> {
        if index < 32 {
            Some(Reg(index))
        } else {
            None
        }
    }

    /// Builds a register from a 5-bit instruction field; upper bits are ignored.
    pub const fn from_field(bits: u32) -> Reg {
        Reg((bits & 0x1f) as u8)
    }

    pub const fn index(self) -> usize {
        self.0 as usize
    }

    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Reg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub enum AluOp {
    #[default]
    Add,
    Sub,
    Sll,
    Slt,
    Sltu,
    Xor,
    Srl,
    Sra,
    Or,
    And,
}

impl AluOp {
    pub const ALL: [AluOp; 10] = [
        AluOp::Add,
        AluOp::Sub,
        AluOp::Sll,
        AluOp::Slt,
        AluOp::Sltu,
        AluOp::Xor,
        AluOp::Srl,
        AluOp::Sra,
        AluOp::Or,
        AluOp::And,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum BranchOp {
    Beq,
    Bne,
    Blt,
    Bge,
    Bltu,
    Bgeu,
}

impl BranchOp {
    pub const ALL: [BranchOp; 6] =
        [BranchOp::Beq, BranchOp::Bne, BranchOp::Blt, BranchOp::Bge, BranchOp::Bltu, BranchOp::Bgeu];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum InstrKind {
    AluReg,
    AluImm,
    Lui,
    Auipc,
    Jal,
    Jalr,
    Branch,
    Load,
    Store,
    Fence,
    Ecall,
    Ebreak,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum MemWidth {
    Byte,
    Half,
    Word,
}

impl MemWidth {
    pub const fn bytes(self) -> u32 {
        match self {
            MemWidth::Byte => 1,
            MemWidth::Half => 2,
            MemWidth::Word => 4,
        }
    }

    /// Truncates `value` to the low `bytes()` bytes.
    pub const fn truncate(self, value: Word) -> Word {
        match self {
            MemWidth::Byte => value & 0xff,
            MemWidth::Half => value & 0xffff,
            MemWidth::Word => value,
        }
    }
}

/// Width and signedness of a memory access. `signed` is only meaningful for
/// loads; stores always carry `false`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct MemAccess {
    pub width: MemWidth,
    pub signed: bool,
}

impl MemAccess {
    pub const WORD: MemAccess = MemAccess { width: MemWidth::Word, signed: false };

    pub const fn load(width: MemWidth, signed: bool) -> Self {
        MemAccess { width, signed }
    }

    pub const fn store(width: MemWidth) -> Self {
        MemAccess { width, signed: false }
    }
}

/// Immediate encoding formats.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ImmFormat {
    I,
    S,
    B,
    U,
    J,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
#[error("illegal instruction {0:#010x}")]
pub struct IllegalInstruction(pub Word);

/// One instruction after decode.
///
/// Register fields that the instruction format does not use are reported as
/// `x0`, so `uses_rs1`/`uses_rs2`/`writes_rd` are the single source of truth
/// for operand usage.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct DecodedInstr {
    pub raw: Word,
    pub kind: InstrKind,
    pub rd: Reg,
    pub rs1: Reg,
    pub rs2: Reg,
    pub imm: Word,
    pub alu_op: AluOp,
    pub branch_op: Option<BranchOp>,
    pub mem: Option<MemAccess>,
    pub uses_rs1: bool,
    pub uses_rs2: bool,
    pub writes_rd: bool,
}

impl DecodedInstr {
    /// The canonical `addi x0, x0, 0`.
    pub const fn nop() -> Self {
        DecodedInstr {
            raw: opcode::NOP,
            kind: InstrKind::AluImm,
            rd: Reg::ZERO,
            rs1: Reg::ZERO,
            rs2: Reg::ZERO,
            imm: 0,
            alu_op: AluOp::Add,
            branch_op: None,
            mem: None,
            uses_rs1: true,
            uses_rs2: false,
            writes_rd: true,
        }
    }

    /// True when the instruction architecturally writes a register other than `x0`.
    pub const fn writes_nonzero_rd(&self) -> bool {
        self.writes_rd && !self.rd.is_zero()
    }

    pub const fn is_load(&self) -> bool {
        matches!(self.kind, InstrKind::Load)
    }

    pub const fn is_store(&self) -> bool {
        matches!(self.kind, InstrKind::Store)
    }

    pub const fn is_control_transfer(&self) -> bool {
        matches!(self.kind, InstrKind::Branch | InstrKind::Jal | InstrKind::Jalr)
    }

    pub const fn is_halt(&self) -> bool {
        matches!(self.kind, InstrKind::Ecall | InstrKind::Ebreak)
    }

    /// Assembly mnemonic, e.g. `"sltiu"`.
    pub fn mnemonic(&self) -> &'static str {
        use AluOp::*;
        match self.kind {
            InstrKind::AluReg => match self.alu_op {
                Add => "add",
                Sub => "sub",
                Sll => "sll",
                Slt => "slt",
                Sltu => "sltu",
                Xor => "xor",
                Srl => "srl",
                Sra => "sra",
                Or => "or",
                And => "and",
            },
            InstrKind::AluImm => match self.alu_op {
                Add | Sub => "addi",
                Sll => "slli",
                Slt => "slti",
                Sltu => "sltiu",
                Xor => "xori",
                Srl => "srli",
                Sra => "srai",
                Or => "ori",
                And => "andi",
            },
            InstrKind::Lui => "lui",
            InstrKind::Auipc => "auipc",
            InstrKind::Jal => "jal",
            InstrKind::Jalr => "jalr",
            InstrKind::Branch => match self.branch_op {
                Some(BranchOp::Beq) => "beq",
                Some(BranchOp::Bne) => "bne",
                Some(BranchOp::Blt) => "blt",
                Some(BranchOp::Bge) => "bge",
                Some(BranchOp::Bltu) => "bltu",
                Some(BranchOp::Bgeu) | None => "bgeu",
            },
            InstrKind::Load => match self.mem.map(|m| (m.width, m.signed)) {
                Some((MemWidth::Byte, true)) => "lb",
                Some((MemWidth::Byte, false)) => "lbu",
                Some((MemWidth::Half, true)) => "lh",
                Some((MemWidth::Half, false)) => "lhu",
                _ => "lw",
            },
            InstrKind::Store => match self.mem.map(|m| m.width) {
                Some(MemWidth::Byte) => "sb",
                Some(MemWidth::Half) => "sh",
                _ => "sw",
            },
            InstrKind::Fence => "fence",
            InstrKind::Ecall => "ecall",
            InstrKind::Ebreak => "ebreak",
        }
    }
}

/// Mnemonics of all 40 base instructions.
pub const BASE_MNEMONICS: [&str; 40] = [
    "lui", "auipc", "jal", "jalr", "beq", "bne", "blt", "bge", "bltu", "bgeu", "lb", "lh", "lw", "lbu", "lhu", "sb",
    "sh", "sw", "addi", "slti", "sltiu", "xori", "ori", "andi", "slli", "srli", "srai", "add", "sub", "sll", "slt",
    "sltu", "xor", "srl", "sra", "or", "and", "fence", "ecall", "ebreak",
];

const fn bits(raw: Word, hi: u32, lo: u32) -> Word {
    (raw >> lo) & ((1u32 << (hi - lo + 1)) - 1)
}

const fn sign_extend(value: Word, width: u32) -> Word {
    let shift = 32 - width;
    (((value << shift) as i32) >> shift) as Word
}

/// Extracts the sign-extended immediate of `raw` for the given format.
pub fn extract_imm(raw: Word, format: ImmFormat) -> Word {
    match format {
        ImmFormat::I => ((raw as i32) >> 20) as Word,
        ImmFormat::S => sign_extend(bits(raw, 31, 25) << 5 | bits(raw, 11, 7), 12),
        ImmFormat::B => sign_extend(
            bits(raw, 31, 31) << 12 | bits(raw, 7, 7) << 11 | bits(raw, 30, 25) << 5 | bits(raw, 11, 8) << 1,
            13,
        ),
        ImmFormat::U => raw & 0xffff_f000,
        ImmFormat::J => sign_extend(
            bits(raw, 31, 31) << 20 | bits(raw, 19, 12) << 12 | bits(raw, 20, 20) << 11 | bits(raw, 30, 21) << 1,
            21,
        ),
    }
}

/// Decodes one RV32I base instruction.
pub fn decode(raw: Word) -> Result<DecodedInstr, IllegalInstruction> {
    let illegal = IllegalInstruction(raw);
    let op = raw & 0x7f;
    let rd = Reg::from_field(bits(raw, 11, 7));
    let rs1 = Reg::from_field(bits(raw, 19, 15));
    let rs2 = Reg::from_field(bits(raw, 24, 20));
    let funct3 = bits(raw, 14, 12);
    let funct7 = bits(raw, 31, 25);

    let base = DecodedInstr {
        raw,
        kind: InstrKind::AluImm,
        rd: Reg::ZERO,
        rs1: Reg::ZERO,
        rs2: Reg::ZERO,
        imm: 0,
        alu_op: AluOp::Add,
        branch_op: None,
        mem: None,
        uses_rs1: false,
        uses_rs2: false,
        writes_rd: false,
    };

    let instr = match op {
        opcode::LUI => {
            DecodedInstr { kind: InstrKind::Lui, rd, imm: extract_imm(raw, ImmFormat::U), writes_rd: true, ..base }
        }
        opcode::AUIPC => {
            DecodedInstr { kind: InstrKind::Auipc, rd, imm: extract_imm(raw, ImmFormat::U), writes_rd: true, ..base }
        }
        opcode::JAL => {
            DecodedInstr { kind: InstrKind::Jal, rd, imm: extract_imm(raw, ImmFormat::J), writes_rd: true, ..base }
        }
        opcode::JALR if funct3 == 0 => DecodedInstr {
            kind: InstrKind::Jalr,
            rd,
            rs1,
            imm: extract_imm(raw, ImmFormat::I),
            uses_rs1: true,
            writes_rd: true,
            ..base
        },
        opcode::BRANCH => {
            let cond = match funct3 {
                0b000 => BranchOp::Beq,
                0b001 => BranchOp::Bne,
                0b100 => BranchOp::Blt,
                0b101 => BranchOp::Bge,
                0b110 => BranchOp::Bltu,
                0b111 => BranchOp::Bgeu,
                _ => return Err(illegal),
            };
            DecodedInstr {
                kind: InstrKind::Branch,
                rs1,
                rs2,
                imm: extract_imm(raw, ImmFormat::B),
                branch_op: Some(cond),
                uses_rs1: true,
                uses_rs2: true,
                ..base
            }
        }
        opcode::LOAD => {
            let access = match funct3 {
                0b000 => MemAccess::load(MemWidth::Byte, true),
                0b001 => MemAccess::load(MemWidth::Half, true),
                0b010 => MemAccess::load(MemWidth::Word, true),
                0b100 => MemAccess::load(MemWidth::Byte, false),
                0b101 => MemAccess::load(MemWidth::Half, false),
                _ => return Err(illegal),
            };
            DecodedInstr {
                kind: InstrKind::Load,
                rd,
                rs1,
                imm: extract_imm(raw, ImmFormat::I),
                mem: Some(access),
                uses_rs1: true,
                writes_rd: true,
                ..base
            }
        }
        opcode::STORE => {
            let width = match funct3 {
                0b000 => MemWidth::Byte,
                0b001 => MemWidth::Half,
                0b010 => MemWidth::Word,
                _ => return Err(illegal),
            };
            DecodedInstr {
                kind: InstrKind::Store,
                rs1,
                rs2,
                imm: extract_imm(raw, ImmFormat::S),
                mem: Some(MemAccess::store(width)),
                uses_rs1: true,
                uses_rs2: true,
                ..base
            }
        }
        opcode::OP_IMM => {
            let alu_op = match (funct3, funct7) {
                (0b000, _) => AluOp::Add,
                (0b010, _) => AluOp::Slt,
                (0b011, _) => AluOp::Sltu,
                (0b100, _) => AluOp::Xor,
                (0b110, _) => AluOp::Or,
                (0b111, _) => AluOp::And,
                (0b001, 0) => AluOp::Sll,
                (0b101, 0) => AluOp::Srl,
                (0b101, opcode::FUNCT7_ALT) => AluOp::Sra,
                _ => return Err(illegal),
            };
            let imm = match alu_op {
                AluOp::Sll | AluOp::Srl | AluOp::Sra => bits(raw, 24, 20),
                _ => extract_imm(raw, ImmFormat::I),
            };
            DecodedInstr { kind: InstrKind::AluImm, rd, rs1, imm, alu_op, uses_rs1: true, writes_rd: true, ..base }
        }
        opcode::OP => {
            let alu_op = match (funct3, funct7) {
                (0b000, 0) => AluOp::Add,
                (0b000, opcode::FUNCT7_ALT) => AluOp::Sub,
                (0b001, 0) => AluOp::Sll,
                (0b010, 0) => AluOp::Slt,
                (0b011, 0) => AluOp::Sltu,
                (0b100, 0) => AluOp::Xor,
                (0b101, 0) => AluOp::Srl,
                (0b101, opcode::FUNCT7_ALT) => AluOp::Sra,
                (0b110, 0) => AluOp::Or,
                (0b111, 0) => AluOp::And,
                _ => return Err(illegal),
            };
            DecodedInstr {
                kind: InstrKind::AluReg,
                rd,
                rs1,
                rs2,
                alu_op,
                uses_rs1: true,
                uses_rs2: true,
                writes_rd: true,
                ..base
            }
        }
        // FENCE is a no-op on a single in-order hart; FENCE.I (funct3=1) is
        // not part of the base set.
        opcode::MISC_MEM if funct3 == 0 => DecodedInstr { kind: InstrKind::Fence, ..base },
        opcode::SYSTEM if raw == opcode::ECALL => DecodedInstr { kind: InstrKind::Ecall, ..base },
        opcode::SYSTEM if raw == opcode::EBREAK => DecodedInstr { kind: InstrKind::Ebreak, ..base },
        _ => return Err(illegal),
    };
    Ok(instr)
}

/// Evaluates an ALU operation. Shift amounts use the low 5 bits of `b`.
pub fn alu_eval(op: AluOp, a: Word, b: Word) -> Word {
    let shamt = b & 0x1f;
    match op {
        AluOp::Add => a.wrapping_add(b),
        AluOp::Sub => a.wrapping_sub(b),
        AluOp::Sll => a << shamt,
        AluOp::Slt => ((a as i32) < (b as i32)) as Word,
        AluOp::Sltu => (a < b) as Word,
        AluOp::Xor => a ^ b,
        AluOp::Srl => a >> shamt,
        AluOp::Sra => ((a as i32) >> shamt) as Word,
        AluOp::Or => a | b,
        AluOp::And => a & b,
    }
}

pub fn branch_taken(op: BranchOp, a: Word, b: Word) -> bool {
    match op {
        BranchOp::Beq => a == b,
        BranchOp::Bne => a != b,
        BranchOp::Blt => (a as i32) < (b as i32),
        BranchOp::Bge => (a as i32) >= (b as i32),
        BranchOp::Bltu => a < b,
        BranchOp::Bgeu => a >= b,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn decodes_canonical_nop() {
        let d = decode(0x0000_0013).unwrap();
        assert_eq!(d, DecodedInstr::nop());
        assert_eq!(d.kind, InstrKind::AluImm);
        assert_eq!(d.rd, Reg::ZERO);
    }

    #[test]
    fn decodes_addi_x1_10() {
        let d = decode(0x00A0_0093).unwrap();
        assert_eq!(d.kind, InstrKind::AluImm);
        assert_eq!(d.rd, Reg::new(1).unwrap());
        assert_eq!(d.rs1, Reg::ZERO);
        assert_eq!(d.imm, 10);
        assert!(d.uses_rs1 && !d.uses_rs2 && d.writes_rd);
    }

    #[test]
    fn mnemonics() {
        for (raw, name) in [
            (0x0000_0013, "addi"),
            (0xFE00_0EE3, "beq"),
            (0x0080_00EF, "jal"),
            (0xFE21_AC23, "sw"),
            (0x1234_52B7, "lui"),
            (0x4030_D093, "srai"),
            (0x0012_8333, "add"),
            (0x0010_0073, "ebreak"),
        ] {
            assert_eq!(decode(raw).unwrap().mnemonic(), name, "{raw:#010x}");
        }
    }

    #[test]
    fn rejects_all_ones_and_all_zeros() {
        assert_eq!(decode(0xFFFF_FFFF), Err(IllegalInstruction(0xFFFF_FFFF)));
        assert_eq!(decode(0), Err(IllegalInstruction(0)));
    }

    #[test]
    fn rejects_compressed_and_reserved_encodings() {
        // c.addi x1, 1
        assert!(decode(0x0000_0085).is_err());
        // slli with funct7 = 0x20 is reserved
        assert!(decode(0x4010_9093).is_err());
        // srli with shamt bit 5 set (RV64 only)
        assert!(decode(0x0200_d093).is_err());
        // add with funct7 = 1 is MUL (M extension)
        assert!(decode(0x0220_80b3).is_err());
        // csrrw x0, mstatus, x0
        assert!(decode(0x3000_1073).is_err());
        // fence.i
        assert!(decode(0x0000_100f).is_err());
        // load funct3 = 3 (LD, RV64)
        assert!(decode(0x0000_3083).is_err());
        // jalr funct3 != 0
        assert!(decode(0x0000_10e7).is_err());
    }

    #[test]
    fn system_and_fence_kinds() {
        assert_eq!(decode(0x0000_0073).unwrap().kind, InstrKind::Ecall);
        assert_eq!(decode(0x0010_0073).unwrap().kind, InstrKind::Ebreak);
        let fence = decode(0x0ff0_000f).unwrap();
        assert_eq!(fence.kind, InstrKind::Fence);
        assert!(!fence.writes_rd && !fence.uses_rs1);
    }

    #[test]
    fn immediate_examples() {
        assert_eq!(extract_imm(0xFFF0_0013, ImmFormat::I), 0xFFFF_FFFF);
        assert_eq!(extract_imm(0x0000_0013, ImmFormat::I), 0);
        // beq x0, x0, -4
        assert_eq!(extract_imm(0xFE00_0EE3, ImmFormat::B), 0xFFFF_FFFC);
        let d = decode(0xFE00_0EE3).unwrap();
        assert_eq!(d.branch_op, Some(BranchOp::Beq));
        assert_eq!(d.imm as i32, -4);
        // jal x1, 8
        assert_eq!(extract_imm(0x0080_00EF, ImmFormat::J), 8);
        // sw x2, -8(x3)
        assert_eq!(extract_imm(0xFE21_AC23, ImmFormat::S) as i32, -8);
        // lui x5, 0x12345
        assert_eq!(extract_imm(0x1234_52B7, ImmFormat::U), 0x1234_5000);
    }

    #[test]
    fn alu_examples() {
        assert_eq!(alu_eval(AluOp::Add, 2, 3), 5);
        assert_eq!(alu_eval(AluOp::Sub, 0, 1), 0xFFFF_FFFF);
        assert_eq!(alu_eval(AluOp::Sra, 0x8000_0000, 31), 0xFFFF_FFFF);
        assert_eq!(alu_eval(AluOp::Sll, 1, 33), 2);
        assert_eq!(alu_eval(AluOp::Slt, 0xFFFF_FFFF, 0), 1);
        assert_eq!(alu_eval(AluOp::Sltu, 0xFFFF_FFFF, 0), 0);
    }

    #[test]
    fn branch_examples() {
        assert!(branch_taken(BranchOp::Beq, 7, 7));
        assert!(branch_taken(BranchOp::Blt, (-1i32) as Word, 0));
        assert!(!branch_taken(BranchOp::Bltu, 0xFFFF_FFFF, 0));
    }

    /// Bit-at-a-time arithmetic shift.
    fn sra_by_bits(a: Word, shamt: u32) -> Word {
        let mut out = 0u32;
        for i in 0..32 {
            let src = (i + shamt).min(31);
            out |= ((a >> src) & 1) << i;
        }
        out
    }

    #[test]
    fn sra_matches_bitwise_oracle_exhaustively_on_shift_amounts() {
        for &a in &[0x8000_0000u32, 0x7fff_ffff, 0xdead_beef, 1, 0, 0xffff_ffff] {
            for s in 0..64 {
                assert_eq!(alu_eval(AluOp::Sra, a, s), sra_by_bits(a, s & 31), "a={a:#x} s={s}");
            }
        }
    }

    #[test]
    fn unsigned_compare_matches_small_word_enumeration() {
        // exhaustive over 4-bit values placed in the high and low ends of the word
        for x in 0u32..16 {
            for y in 0u32..16 {
                for (a, b) in [(x, y), (x << 28, y << 28), (x << 28 | x, y << 28 | y)] {
                    let (wa, wb) = (a as u64, b as u64);
                    assert_eq!(branch_taken(BranchOp::Bltu, a, b), wa < wb);
                    assert_eq!(branch_taken(BranchOp::Bgeu, a, b), wa >= wb);
                }
            }
        }
    }

    /// 64-bit intermediate reference for every ALU operation.
    fn alu_oracle(op: AluOp, a: u32, b: u32) -> u32 {
        let (sa, sb) = (a as i32 as i64, b as i32 as i64);
        let (ua, ub) = (a as u64, b as u64);
        let sh = (b & 31) as u64;
        let r: u64 = match op {
            AluOp::Add => ua + ub,
            AluOp::Sub => (sa - sb) as u64,
            AluOp::Sll => ua << sh,
            AluOp::Slt => (sa < sb) as u64,
            AluOp::Sltu => (ua < ub) as u64,
            AluOp::Xor => ua ^ ub,
            AluOp::Srl => ua >> sh,
            AluOp::Sra => (sa >> sh) as u64,
            AluOp::Or => ua | ub,
            AluOp::And => ua & ub,
        };
        r as u32
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn alu_agrees_with_wide_oracle(a: u32, b: u32) {
            for op in AluOp::ALL {
                prop_assert_eq!(alu_eval(op, a, b), alu_oracle(op, a, b), "{:?}", op);
            }
        }

        #[test]
        fn complementary_branches(a: u32, b: u32) {
            prop_assert_eq!(branch_taken(BranchOp::Bge, a, b), !branch_taken(BranchOp::Blt, a, b));
            prop_assert_eq!(branch_taken(BranchOp::Bgeu, a, b), !branch_taken(BranchOp::Bltu, a, b));
            prop_assert_eq!(branch_taken(BranchOp::Bne, a, b), !branch_taken(BranchOp::Beq, a, b));
        }

        #[test]
        fn branch_and_jump_immediates_are_even(raw: u32) {
            prop_assert_eq!(extract_imm(raw, ImmFormat::B) & 1, 0);
            prop_assert_eq!(extract_imm(raw, ImmFormat::J) & 1, 0);
        }

        #[test]
        fn decode_is_total_and_deterministic(raw: u32) {
            let first = decode(raw);
            prop_assert_eq!(first, decode(raw));
            if let Ok(d) = first {
                prop_assert_eq!(d.raw, raw);
                prop_assert!(!(d.writes_rd && matches!(
                    d.kind,
                    InstrKind::Branch | InstrKind::Store | InstrKind::Fence | InstrKind::Ecall | InstrKind::Ebreak
                )));
                prop_assert_eq!(d.branch_op.is_some(), d.kind == InstrKind::Branch);
                prop_assert_eq!(d.mem.is_some(), d.is_load() || d.is_store());
            }
        }
    }
}
