//! Test harness: program construction, runs, co-simulation and traces.

pub mod asm;
pub mod directed;
pub mod gen;
mod run;
pub mod trace;

pub use run::{
    cosim, run_program, CosimVerdict, Divergence, GenKind, GenSpec, HarnessError, ProgramSource, RunConfig, RunReport,
    RunStats,
};
