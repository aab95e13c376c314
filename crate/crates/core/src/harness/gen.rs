//! Program generators: hazard-specific microbenchmarks and seeded random
//! programs for differential testing.

use std::fmt;
use std::str::FromStr;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::asm::*;
use crate::isa::{AluOp, BranchOp, MemWidth, Reg};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MicrobenchKind {
    /// `n` independent ALU operations.
    Straightline,
    /// `n` loads, each immediately followed by a use of the loaded register.
    LoadUsePairs,
    /// A loop whose backward branch is taken exactly `n` times.
    TakenBranchLoop,
}

impl MicrobenchKind {
    pub const ALL: [MicrobenchKind; 3] =
        [MicrobenchKind::Straightline, MicrobenchKind::LoadUsePairs, MicrobenchKind::TakenBranchLoop];

    pub fn name(self) -> &'static str {
        match self {
            MicrobenchKind::Straightline => "straightline",
            MicrobenchKind::LoadUsePairs => "load_use_pairs",
            MicrobenchKind::TakenBranchLoop => "taken_branch_loop",
        }
    }
}

impl fmt::Display for MicrobenchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MicrobenchKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MicrobenchKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| format!("unknown microbenchmark `{s}`"))
    }
}

fn any_reg(rng: &mut ChaCha8Rng) -> Reg {
    x(rng.random_range(1..32u8))
}

/// Builds a self-halting microbenchmark.
pub fn gen_microbench(kind: MicrobenchKind, n: u32, seed: u64) -> Program {
    assert!(n > 0, "microbenchmarks need n > 0");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    match kind {
        MicrobenchKind::Straightline => {
            for _ in 0..n {
                out.push(addi(any_reg(&mut rng), Reg::ZERO, rng.random_range(-2048..2048)));
            }
        }
        MicrobenchKind::LoadUsePairs => {
            // seed a small table so the loads return non-zero data
            for slot in 0..8 {
                out.push(addi(x(1), Reg::ZERO, rng.random_range(-2048..2048)));
                out.push(sw(x(1), Reg::ZERO, slot * 4));
            }
            for _ in 0..n {
                let loaded = any_reg(&mut rng);
                out.push(lw(loaded, Reg::ZERO, rng.random_range(0..8) * 4));
                let other = any_reg(&mut rng);
                let (a, b) = if rng.random_bool(0.5) { (loaded, other) } else { (other, loaded) };
                out.push(alu(AluOp::Add, any_reg(&mut rng), a, b));
            }
        }
        MicrobenchKind::TakenBranchLoop => {
            let counter = any_reg(&mut rng);
            out.extend(li(counter, n));
            out.push(addi(counter, counter, -1));
            out.push(branch(BranchOp::Bge, counter, Reg::ZERO, -4));
        }
    }
    out.push(Inst::Ecall);
    Program::new(out)
}

// Register roles in random programs. Address temporaries are only ever
// written by their own group, so a branch landing on any group start
// always sees an in-range base.
const LOAD_BASE: Reg = x(28);
const STORE_BASE: Reg = x(29);
const JUMP_BASE: Reg = x(30);
const MAX_DATA_REG: u8 = 27;

/// A generated group before branch offsets are known.
enum Group {
    Fixed(Vec<Inst>),
    Branch {
        op: BranchOp,
        rs1: Reg,
        rs2: Reg,
        skip: usize,
    },
    Jal {
        rd: Reg,
        skip: usize,
    },
    /// `auipc base, 0; jalr rd, base, off` or a single absolute `jalr rd, x0, addr`.
    Jalr {
        rd: Reg,
        skip: usize,
        via_base: bool,
    },
}

impl Group {
    fn len(&self) -> usize {
        match self {
            Group::Fixed(v) => v.len(),
            Group::Jalr { via_base: true, .. } => 2,
            _ => 1,
        }
    }
}

struct RandomGen {
    rng: ChaCha8Rng,
    density: f64,
    /// Most recent register results in static order, newest last.
    recent: Vec<Reg>,
}

impl RandomGen {
    fn data_reg(&mut self) -> Reg {
        x(self.rng.random_range(1..=MAX_DATA_REG))
    }

    /// A source operand: with probability `density` the result of the
    /// `back`-th most recent writer, otherwise a register nobody recently
    /// wrote (or `x0` in fully independent programs).
    fn source(&mut self, back: usize) -> Reg {
        let dependent = self.density > 0.0 && self.rng.random_bool(self.density);
        if dependent {
            if let Some(&r) = self.recent.iter().rev().nth(back) {
                return r;
            }
        }
        if self.density == 0.0 {
            Reg::ZERO
        } else {
            self.data_reg()
        }
    }

    fn dest(&mut self) -> Reg {
        let rd = self.data_reg();
        self.recent.push(rd);
        if self.recent.len() > 4 {
            self.recent.remove(0);
        }
        rd
    }

    fn group(&mut self) -> Group {
        let roll = self.rng.random_range(0..100u32);
        let alu_ops = [
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
        match roll {
            0..=24 => {
                let op = alu_ops[self.rng.random_range(0..alu_ops.len())];
                let (rs1, rs2) = (self.source(0), self.source(1));
                Group::Fixed(vec![alu(op, self.dest(), rs1, rs2)])
            }
            25..=49 => {
                let op = alu_ops[self.rng.random_range(0..alu_ops.len())];
                let rs1 = self.source(0);
                let inst = match op {
                    AluOp::Sub => addi(self.dest(), rs1, self.rng.random_range(-2048..2048)),
                    AluOp::Sll | AluOp::Srl | AluOp::Sra => alui(op, self.dest(), rs1, self.rng.random_range(0..32)),
                    _ => alui(op, self.dest(), rs1, self.rng.random_range(-2048..2048)),
                };
                Group::Fixed(vec![inst])
            }
            50..=53 => Group::Fixed(vec![Inst::Lui { rd: self.dest(), imm20: self.rng.random_range(0..1 << 20) }]),
            54..=57 => Group::Fixed(vec![Inst::Auipc { rd: self.dest(), imm20: self.rng.random_range(0..1 << 20) }]),
            58..=69 => {
                let (width, signed) = match self.rng.random_range(0..5) {
                    0 => (MemWidth::Byte, true),
                    1 => (MemWidth::Byte, false),
                    2 => (MemWidth::Half, true),
                    3 => (MemWidth::Half, false),
                    _ => (MemWidth::Word, true),
                };
                let AddressSetup { mut insts, base, offset } = self.address(LOAD_BASE, width);
                insts.push(Inst::Load { width, signed, rd: self.dest(), rs1: base, offset });
                Group::Fixed(insts)
            }
            70..=79 => {
                let width = [MemWidth::Byte, MemWidth::Half, MemWidth::Word][self.rng.random_range(0..3)];
                let data = self.source(0);
                let AddressSetup { mut insts, base, offset } = self.address(STORE_BASE, width);
                insts.push(Inst::Store { width, rs1: base, rs2: data, offset });
                Group::Fixed(insts)
            }
            80..=90 => {
                let op = BranchOp::ALL[self.rng.random_range(0..6)];
                let (rs1, rs2) = (self.source(0), self.source(1));
                Group::Branch { op, rs1, rs2, skip: self.rng.random_range(0..4) }
            }
            91..=94 => Group::Jal { rd: self.dest(), skip: self.rng.random_range(0..4) },
            95..=98 => {
                let via_base = self.density > 0.0;
                Group::Jalr { rd: self.dest(), skip: self.rng.random_range(0..4), via_base }
            }
            _ => Group::Fixed(vec![Inst::Fence]),
        }
    }

    /// Address setup for a memory access: either a masked, in-range base
    /// derived from a recent result, or `x0` plus an absolute offset.
    fn address(&mut self, temp: Reg, width: MemWidth) -> AddressSetup {
        let align = width.bytes() as i32;
        let dependent = self.density > 0.0 && self.rng.random_bool(self.density);
        if dependent {
            let src = self.source(0);
            let mask = 0x7ff & !(align - 1);
            AddressSetup {
                insts: vec![alui(AluOp::And, temp, src, mask)],
                base: temp,
                offset: self.rng.random_range(0..16) * align,
            }
        } else {
            AddressSetup { insts: vec![], base: Reg::ZERO, offset: self.rng.random_range(0..2048 / align) * align }
        }
    }
}

struct AddressSetup {
    insts: Vec<Inst>,
    base: Reg,
    offset: i32,
}

/// Generates a terminating random program of roughly `n` instructions
/// followed by `ecall`. Control flow only moves forward; loads and stores
/// stay inside the first 2 KiB (+64 bytes) of data memory. `density` is the
/// probability that an operand reads a result produced just before it.
pub fn gen_random(n: u32, seed: u64, density: f64) -> Program {
    assert!(n > 0, "random programs need n > 0");
    assert!((0.0..=1.0).contains(&density), "density must be in [0, 1]");
    let mut g = RandomGen { rng: ChaCha8Rng::seed_from_u64(seed), density, recent: Vec::new() };

    let mut groups = Vec::new();
    let mut len = 0;
    while len < n as usize {
        let group = g.group();
        len += group.len();
        groups.push(group);
    }
    let exit_code = g.rng.random_range(0..256);
    groups.push(Group::Fixed(vec![addi(x(10), Reg::ZERO, exit_code), Inst::Ecall]));

    // byte address of each group start
    let mut starts = Vec::with_capacity(groups.len());
    let mut pc = 0i32;
    for group in &groups {
        starts.push(pc);
        pc += 4 * group.len() as i32;
    }
    let last = groups.len() - 1;
    let target = |i: usize, skip: usize| starts[(i + 1 + skip).min(last)];

    let mut insts = Vec::with_capacity(pc as usize / 4);
    for (i, group) in groups.into_iter().enumerate() {
        let here = starts[i];
        match group {
            Group::Fixed(v) => insts.extend(v),
            Group::Branch { op, rs1, rs2, skip } => insts.push(branch(op, rs1, rs2, target(i, skip) - here)),
            Group::Jal { rd, skip } => insts.push(Inst::Jal { rd, offset: target(i, skip) - here }),
            Group::Jalr { rd, skip, via_base: true } => {
                insts.push(Inst::Auipc { rd: JUMP_BASE, imm20: 0 });
                insts.push(Inst::Jalr { rd, rs1: JUMP_BASE, offset: target(i, skip) - here });
            }
            Group::Jalr { rd, skip, via_base: false } => {
                let to = target(i, skip);
                if to < 2048 {
                    insts.push(Inst::Jalr { rd, rs1: Reg::ZERO, offset: to });
                } else {
                    insts.push(Inst::Jal { rd, offset: to - here });
                }
            }
        }
    }
    Program::new(insts)
}
