//! Scratchpad memories and the synchronous-read port model.
//!
//! A [`Scratchpad`] is a flat little-endian byte array. The golden model
//! uses its combinational view ([`Scratchpad::read_now`]); the pipeline talks
//! to it through [`MemPort`]s, which register the request at the end of the
//! issuing cycle and deliver read data one cycle later.

use serde::Serialize;
use thiserror::Error;

use crate::isa::{MemAccess, MemWidth, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Error, Serialize)]
pub enum MemFault {
    #[error("address {addr:#010x} ({bytes} bytes) is outside memory")]
    OutOfRange { addr: Word, bytes: u32 },
    #[error("address {addr:#010x} is not aligned to {bytes} bytes")]
    Misaligned { addr: Word, bytes: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
pub enum MemConfigError {
    #[error("scratchpad size {0} is not a power of two of at least 4 bytes")]
    BadSize(usize),
    #[error("scratchpad at {base:#010x} with size {size:#x} wraps the address space")]
    Wraps { base: Word, size: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Scratchpad {
    base: Word,
    bytes: Vec<u8>,
}

impl Scratchpad {
    pub fn new(base: Word, size: usize) -> Result<Self, MemConfigError> {
        if size < 4 || !size.is_power_of_two() {
            return Err(MemConfigError::BadSize(size));
        }
        if base as u64 + size as u64 > 1 << 32 {
            return Err(MemConfigError::Wraps { base, size });
        }
        Ok(Scratchpad { base, bytes: vec![0; size] })
    }

    pub fn base(&self) -> Word {
        self.base
    }

    pub fn size(&self) -> usize {
        self.bytes.len()
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    /// Validates an access and returns the byte offset into the array.
    fn locate(&self, addr: Word, width: MemWidth) -> Result<usize, MemFault> {
        let bytes = width.bytes();
        let start = addr as u64;
        if start < self.base as u64 || start + bytes as u64 > self.base as u64 + self.size() as u64 {
            return Err(MemFault::OutOfRange { addr, bytes });
        }
        if !addr.is_multiple_of(bytes) {
            return Err(MemFault::Misaligned { addr, bytes });
        }
        Ok((addr - self.base) as usize)
    }

    /// Combinational little-endian load, sign- or zero-extended per `access`.
    pub fn read_now(&self, addr: Word, access: MemAccess) -> Result<Word, MemFault> {
        let off = self.locate(addr, access.width)?;
        let b = &self.bytes[off..off + access.width.bytes() as usize];
        Ok(match (access.width, access.signed) {
            (MemWidth::Byte, false) => b[0] as Word,
            (MemWidth::Byte, true) => b[0] as i8 as i32 as Word,
            (MemWidth::Half, false) => u16::from_le_bytes([b[0], b[1]]) as Word,
            (MemWidth::Half, true) => i16::from_le_bytes([b[0], b[1]]) as i32 as Word,
            (MemWidth::Word, _) => Word::from_le_bytes([b[0], b[1], b[2], b[3]]),
        })
    }

    /// Stores the low `width` bytes of `value`.
    pub fn write_now(&mut self, addr: Word, width: MemWidth, value: Word) -> Result<(), MemFault> {
        let off = self.locate(addr, width)?;
        let n = width.bytes() as usize;
        self.bytes[off..off + n].copy_from_slice(&value.to_le_bytes()[..n]);
        Ok(())
    }

    /// Replaces the contents with `image` placed at byte `offset` from the
    /// base; everything else is zero.
    pub fn load_image(&mut self, image: &[u8], offset: usize) -> Result<(), MemFault> {
        let end = offset.checked_add(image.len());
        match end {
            Some(end) if end <= self.size() => {
                self.bytes.fill(0);
                self.bytes[offset..end].copy_from_slice(image);
                Ok(())
            }
            _ => Err(MemFault::OutOfRange { addr: self.base.wrapping_add(offset as Word), bytes: image.len() as u32 }),
        }
    }
}

/// The memories a core sees through its two interfaces.
///
/// `Split` is the default Harvard organization: separate instruction and
/// data scratchpads. `Unified` routes both interfaces to one scratchpad.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum MemSystem {
    Split { imem: Scratchpad, dmem: Scratchpad },
    Unified(Scratchpad),
}

impl MemSystem {
    pub const DEFAULT_SIZE: usize = 64 * 1024;

    pub fn split(imem_size: usize, dmem_size: usize) -> Result<Self, MemConfigError> {
        Ok(MemSystem::Split { imem: Scratchpad::new(0, imem_size)?, dmem: Scratchpad::new(0, dmem_size)? })
    }

    pub fn unified(size: usize) -> Result<Self, MemConfigError> {
        Ok(MemSystem::Unified(Scratchpad::new(0, size)?))
    }

    /// Split 64 KiB + 64 KiB memories with `program` loaded at offset 0.
    pub fn with_program(program: &[u8]) -> Result<Self, MemFault> {
        let mut mem = MemSystem::split(Self::DEFAULT_SIZE, Self::DEFAULT_SIZE).expect("default sizes are valid");
        mem.imem_mut().load_image(program, 0)?;
        Ok(mem)
    }

    pub fn imem(&self) -> &Scratchpad {
        match self {
            MemSystem::Split { imem, .. } => imem,
            MemSystem::Unified(m) => m,
        }
    }

    pub fn imem_mut(&mut self) -> &mut Scratchpad {
        match self {
            MemSystem::Split { imem, .. } => imem,
            MemSystem::Unified(m) => m,
        }
    }

    pub fn dmem(&self) -> &Scratchpad {
        match self {
            MemSystem::Split { dmem, .. } => dmem,
            MemSystem::Unified(m) => m,
        }
    }

    pub fn dmem_mut(&mut self) -> &mut Scratchpad {
        match self {
            MemSystem::Split { dmem, .. } => dmem,
            MemSystem::Unified(m) => m,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PortKind {
    Instruction,
    Data,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MemOp {
    Read,
    Write(Word),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MemRequest {
    pub addr: Word,
    pub access: MemAccess,
    pub op: MemOp,
}

impl MemRequest {
    pub const fn read(addr: Word, access: MemAccess) -> Self {
        MemRequest { addr, access, op: MemOp::Read }
    }

    pub const fn write(addr: Word, width: MemWidth, data: Word) -> Self {
        MemRequest { addr, access: MemAccess::store(width), op: MemOp::Write(data) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
pub enum PortError {
    #[error("a request was already issued on this port this cycle")]
    Busy,
    #[error("the instruction port is read-only")]
    ReadOnly,
}

/// What a registered request delivers at the next cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Registered {
    Read(MemRequest),
    Written(Result<Word, MemFault>),
}

/// A synchronous memory interface: address and write data are captured in
/// input registers at the end of the issuing cycle. Writes take effect at
/// that edge; read data appears during the following cycle and reflects every
/// write committed up to and including that edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MemPort {
    kind: PortKind,
    issued: Option<MemRequest>,
    registered: Option<Registered>,
}

impl MemPort {
    pub fn new(kind: PortKind) -> Self {
        MemPort { kind, issued: None, registered: None }
    }

    pub fn kind(&self) -> PortKind {
        self.kind
    }

    /// Presents a request during the current cycle.
    pub fn issue(&mut self, req: MemRequest) -> Result<(), PortError> {
        if self.kind == PortKind::Instruction && matches!(req.op, MemOp::Write(_)) {
            return Err(PortError::ReadOnly);
        }
        if self.issued.is_some() {
            return Err(PortError::Busy);
        }
        self.issued = Some(req);
        Ok(())
    }

    /// Clock edge: commits an issued write and registers an issued read.
    pub fn clock(&mut self, mem: &mut Scratchpad) {
        self.registered = self.issued.take().map(|req| match req.op {
            MemOp::Read => Registered::Read(req),
            MemOp::Write(data) => Registered::Written(
                mem.write_now(req.addr, req.access.width, data).map(|()| req.access.width.truncate(data)),
            ),
        });
    }

    /// Returns the outcome of the request registered at the last clock edge:
    /// read data for reads, the stored (truncated) value for writes.
    pub fn collect(&mut self, mem: &Scratchpad) -> Option<Result<Word, MemFault>> {
        self.registered.take().map(|r| match r {
            Registered::Read(req) => mem.read_now(req.addr, req.access),
            Registered::Written(outcome) => outcome,
        })
    }

    pub fn is_idle(&self) -> bool {
        self.issued.is_none() && self.registered.is_none()
    }
}
