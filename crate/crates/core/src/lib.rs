//! Cycle-accurate RV32I pipeline simulator.
//!
//! - [`isa`]: decoding, immediates, ALU and branch conditions
//! - [`mem`]: scratchpad memories and synchronous ports
//! - [`golden`]: instruction-level reference model
//! - [`pipeline`]: the 3/4/5-stage cycle-accurate core
//! - [`harness`]: program generators, co-simulation, statistics and traces

pub mod event;
pub mod golden;
pub mod harness;
pub mod isa;
pub mod mem;
pub mod pipeline;

pub use event::{Fault, HaltReason, MemWrite, RetireEvent, RunOutcome, StepError, Trap};
pub use pipeline::{Pipeline, PipelineConfig};
