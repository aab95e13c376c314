//! Running a program on one pipeline organization, optionally against the
//! golden model.

use std::fmt;
use std::io::{self, Write};
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use super::gen::{gen_microbench, gen_random, MicrobenchKind};
use super::trace::format_trace_line;
use crate::event::{HaltReason, RetireEvent, RunOutcome, Trap};
use crate::golden::{self, ArchState};
use crate::isa::Word;
use crate::mem::{MemConfigError, MemFault, MemSystem};
use crate::pipeline::{Pipeline, PipelineConfig, PipelineOptions};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("cannot write trace: {0}")]
    Trace(#[source] io::Error),
    #[error("invalid memory configuration: {0}")]
    MemConfig(#[from] MemConfigError),
    #[error("program image does not fit in instruction memory: {0}")]
    ImageDoesNotFit(MemFault),
    #[error("max_cycles must be positive")]
    ZeroMaxCycles,
    #[error("invalid generator spec: {0}")]
    BadGenSpec(String),
    #[error("no halt within {limit} cycles")]
    StepLimitExceeded { limit: u64 },
    #[error("{trap} (cycle {cycle})")]
    Trap { trap: Trap, cycle: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GenKind {
    Microbench(MicrobenchKind),
    /// Random program with the given dependency density.
    Random(f64),
}

/// `<kind>:<n>:<seed>`, where kind is a microbenchmark name or `random`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenSpec {
    pub kind: GenKind,
    pub n: u32,
    pub seed: u64,
}

impl GenSpec {
    pub const DEFAULT_DENSITY: f64 = 0.5;

    pub fn image(&self) -> Vec<u8> {
        match self.kind {
            GenKind::Microbench(k) => gen_microbench(k, self.n, self.seed).image(),
            GenKind::Random(d) => gen_random(self.n, self.seed, d).image(),
        }
    }
}

impl FromStr for GenSpec {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |why: &str| HarnessError::BadGenSpec(format!("`{s}`: {why}"));
        let parts: Vec<&str> = s.split(':').collect();
        let [kind, n, seed] = parts[..] else {
            return Err(bad("expected <kind>:<n>:<seed>"));
        };
        let kind = match kind {
            "random" => GenKind::Random(Self::DEFAULT_DENSITY),
            k => GenKind::Microbench(k.parse().map_err(|e: String| bad(&e))?),
        };
        let n: u32 = n.parse().map_err(|_| bad("n must be a positive integer"))?;
        if n == 0 {
            return Err(bad("n must be a positive integer"));
        }
        let seed = seed.parse().map_err(|_| bad("seed must be an unsigned integer"))?;
        Ok(GenSpec { kind, n, seed })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProgramSource {
    Image(PathBuf),
    Bytes(Vec<u8>),
    Generated(GenSpec),
}

impl ProgramSource {
    pub fn load(&self) -> Result<Vec<u8>, HarnessError> {
        match self {
            ProgramSource::Image(path) => {
                std::fs::read(path).map_err(|source| HarnessError::Io { path: path.clone(), source })
            }
            ProgramSource::Bytes(b) => Ok(b.clone()),
            ProgramSource::Generated(spec) => Ok(spec.image()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub stages: PipelineConfig,
    pub source: ProgramSource,
    /// Byte offset of the image inside instruction memory.
    pub offset: Word,
    pub entry: Word,
    pub max_cycles: u64,
    pub imem_size: usize,
    pub dmem_size: usize,
    /// One memory for code and data, `imem_size` bytes long.
    pub unified: bool,
    pub options: PipelineOptions,
}

impl RunConfig {
    pub const DEFAULT_MAX_CYCLES: u64 = 10_000_000;

    pub fn new(stages: PipelineConfig, source: ProgramSource) -> Self {
        RunConfig {
            stages,
            source,
            offset: 0,
            entry: 0,
            max_cycles: Self::DEFAULT_MAX_CYCLES,
            imem_size: MemSystem::DEFAULT_SIZE,
            dmem_size: MemSystem::DEFAULT_SIZE,
            unified: false,
            options: PipelineOptions::default(),
        }
    }

    pub fn with_stages(&self, stages: PipelineConfig) -> Self {
        RunConfig { stages, ..self.clone() }
    }

    /// Fresh memory with the program loaded.
    pub fn memory(&self, image: &[u8]) -> Result<MemSystem, HarnessError> {
        if self.max_cycles == 0 {
            return Err(HarnessError::ZeroMaxCycles);
        }
        let mut mem = if self.unified {
            MemSystem::unified(self.imem_size)?
        } else {
            MemSystem::split(self.imem_size, self.dmem_size)?
        };
        mem.imem_mut().load_image(image, self.offset as usize).map_err(HarnessError::ImageDoesNotFit)?;
        Ok(mem)
    }
}

/// Summary record of one run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunStats {
    pub stages: u32,
    pub cycles: u64,
    pub retired: u64,
    pub cpi: Option<f64>,
    pub taken_branch_flush_bubbles: u64,
    pub load_use_stalls: u64,
    pub exit_code: Word,
    pub halt_reason: String,
}

/// Everything observable at the end of a pipeline run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub stats: RunStats,
    pub outcome: RunOutcome,
    pub events: Vec<RetireEvent>,
    pub regs: [Word; 32],
    pub dmem: Vec<u8>,
}

impl RunReport {
    /// Turns a trap or an exhausted cycle budget into an error.
    pub fn check(&self) -> Result<(), HarnessError> {
        match self.outcome {
            RunOutcome::Halted(HaltReason::Trap(trap)) => Err(HarnessError::Trap { trap, cycle: self.stats.cycles }),
            RunOutcome::StepLimitExceeded => Err(HarnessError::StepLimitExceeded { limit: self.stats.cycles }),
            RunOutcome::Halted(_) => Ok(()),
        }
    }
}

fn pipeline_run(cfg: &RunConfig, image: &[u8], mut trace: Option<&mut dyn Write>) -> Result<RunReport, HarnessError> {
    let mut pipe = Pipeline::with_options(cfg.stages, cfg.memory(image)?, cfg.entry, cfg.options);
    let mut trace_err = None;
    let run = pipe.run(cfg.max_cycles, |report| {
        if let (Some(w), None) = (trace.as_mut(), &trace_err) {
            if let Err(e) = writeln!(w, "{}", format_trace_line(cfg.stages, report)) {
                trace_err = Some(e);
            }
        }
    });
    if let Some(e) = trace_err {
        return Err(HarnessError::Trace(e));
    }
    let c = run.counters;
    let stats = RunStats {
        stages: cfg.stages.stages(),
        cycles: c.cycles,
        retired: c.retired,
        cpi: c.cpi(),
        taken_branch_flush_bubbles: c.taken_branch_flushes,
        load_use_stalls: c.load_use_stalls,
        exit_code: pipe.exit_code(),
        halt_reason: run.outcome.to_string(),
    };
    Ok(RunReport {
        stats,
        outcome: run.outcome,
        events: run.events,
        regs: *pipe.regs(),
        dmem: pipe.mem().dmem().as_bytes().to_vec(),
    })
}

/// Runs the configured program on the pipeline, writing one trace line per
/// cycle to `trace` if given. Traps and the cycle limit are reported in the
/// result, not as errors; see [`RunReport::check`].
pub fn run_program(cfg: &RunConfig, trace: Option<&mut dyn Write>) -> Result<RunReport, HarnessError> {
    pipeline_run(cfg, &cfg.source.load()?, trace)
}

/// First point where the pipeline disagrees with the golden model.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Divergence {
    /// Index into the retirement stream, or the stream length for end-state fields.
    pub index: usize,
    pub field: &'static str,
    pub golden: String,
    pub pipeline: String,
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "retirement {} differs in {}: golden {} vs pipeline {}",
            self.index, self.field, self.golden, self.pipeline
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CosimVerdict {
    /// Retirement events that matched before any divergence.
    pub matched: usize,
    pub divergence: Option<Divergence>,
    pub golden_outcome: RunOutcome,
    pub report: RunReport,
}

impl CosimVerdict {
    pub fn passed(&self) -> bool {
        self.divergence.is_none()
    }
}

fn diff<T: PartialEq + fmt::Debug>(index: usize, field: &'static str, g: T, p: T) -> Option<Divergence> {
    (g != p).then(|| Divergence { index, field, golden: format!("{g:?}"), pipeline: format!("{p:?}") })
}

fn diff_event(index: usize, g: &RetireEvent, p: &RetireEvent) -> Option<Divergence> {
    diff(index, "pc", g.pc, p.pc)
        .or_else(|| diff(index, "raw", g.raw, p.raw))
        .or_else(|| diff(index, "wrote_rd", g.wrote_rd, p.wrote_rd))
        .or_else(|| diff(index, "mem_write", g.mem_write, p.mem_write))
        .or_else(|| diff(index, "next_pc", g.next_pc, p.next_pc))
}

/// Runs the program on the golden model and the pipeline and compares the
/// retirement streams, halt reasons and final architectural state.
///
/// Fails with [`HarnessError::StepLimitExceeded`] when either side runs out
/// of budget before any divergence shows up.
pub fn cosim(cfg: &RunConfig, trace: Option<&mut dyn Write>) -> Result<CosimVerdict, HarnessError> {
    let image = cfg.source.load()?;
    let gold = golden::run(ArchState::new(cfg.memory(&image)?, cfg.entry), cfg.max_cycles);
    let report = pipeline_run(cfg, &image, trace)?;

    let mut divergence = None;
    let mut matched = 0;
    for (i, (g, p)) in gold.events.iter().zip(&report.events).enumerate() {
        divergence = diff_event(i, g, p);
        if divergence.is_some() {
            break;
        }
        matched = i + 1;
    }

    let limited = gold.outcome == RunOutcome::StepLimitExceeded || report.outcome == RunOutcome::StepLimitExceeded;
    if divergence.is_none() && limited {
        return Err(HarnessError::StepLimitExceeded { limit: cfg.max_cycles });
    }

    let end = matched;
    divergence = divergence
        .or_else(|| diff(end, "retired", gold.events.len(), report.events.len()))
        .or_else(|| diff(end, "halt_reason", gold.outcome, report.outcome))
        .or_else(|| diff(end, "exit_code", gold.state.exit_code, report.stats.exit_code))
        .or_else(|| diff(end, "regs", gold.state.regs(), &report.regs))
        .or_else(|| {
            let g = gold.state.mem.dmem().as_bytes();
            g.iter().zip(&report.dmem).position(|(a, b)| a != b).map(|at| Divergence {
                index: end,
                field: "dmem",
                golden: format!("[{at:#x}] = {:#04x}", g[at]),
                pipeline: format!("[{at:#x}] = {:#04x}", report.dmem[at]),
            })
        });

    Ok(CosimVerdict { matched, divergence, golden_outcome: gold.outcome, report })
}
