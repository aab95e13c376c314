//! Acceptance criteria, one PASS/FAIL line each. Runs as a plain binary so
//! the lines are always printed.

use std::collections::BTreeSet;
use std::io::{self, Write};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rvpipe::golden::{self, ArchState};
use rvpipe::harness::directed::{directed_suite, x0_program};
use rvpipe::harness::gen::{gen_microbench, gen_random, MicrobenchKind};
use rvpipe::harness::{cosim, run_program, ProgramSource, RunConfig, RunReport};
use rvpipe::isa::{decode, InstrKind, BASE_MNEMONICS};
use rvpipe::mem::MemSystem;
use rvpipe::{HaltReason, Pipeline, PipelineConfig};
use sha2::{Digest, Sha256};

type Verdict = Result<String, String>;

struct HashWriter(Sha256);

impl Write for HashWriter {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.0.update(buf);
        Ok(buf.len())
    }

    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}

fn config_for(stages: PipelineConfig, image: Vec<u8>) -> RunConfig {
    RunConfig::new(stages, ProgramSource::Bytes(image))
}

fn run(stages: PipelineConfig, image: &[u8]) -> RunReport {
    let report = run_program(&config_for(stages, image.to_vec()), None).expect("program loads");
    report.check().expect("program halts cleanly");
    report
}

fn within(limit: Duration, start: Instant) -> Result<Duration, String> {
    let took = start.elapsed();
    if took < limit {
        Ok(took)
    } else {
        Err(format!("took {took:?}, limit {limit:?}"))
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn cpi_of_one() -> Verdict {
    let start = Instant::now();
    let image = gen_microbench(MicrobenchKind::Straightline, 1000, 1).image();
    for stages in PipelineConfig::ALL {
        let s = run(stages, &image).stats;
        let expected = s.retired + (s.stages as u64 - 1);
        ensure(s.retired == 1001, || format!("{stages}: retired {}", s.retired))?;
        ensure(s.cycles == expected, || format!("{stages}: cycles {} != {expected}", s.cycles))?;
    }
    let took = within(Duration::from_secs(1), start)?;
    Ok(format!("cycles = retired + (stages - 1) on 3/4/5 stages in {took:?}"))
}

fn taken_branch_penalty() -> Verdict {
    let start = Instant::now();
    let image = gen_microbench(MicrobenchKind::TakenBranchLoop, 100, 1).image();
    for stages in PipelineConfig::ALL {
        let s = run(stages, &image).stats;
        ensure(s.taken_branch_flush_bubbles == 200, || {
            format!("{stages}: {} flush bubbles", s.taken_branch_flush_bubbles)
        })?;
        let law = s.retired + (s.stages as u64 - 1) + s.taken_branch_flush_bubbles + s.load_use_stalls;
        ensure(s.cycles == law, || format!("{stages}: cycles {} != {law}", s.cycles))?;
    }
    let took = within(Duration::from_secs(1), start)?;
    Ok(format!("200 flush bubbles and cycle-count law on 3/4/5 stages in {took:?}"))
}

fn load_use_asymmetry() -> Verdict {
    let start = Instant::now();
    let image = gen_microbench(MicrobenchKind::LoadUsePairs, 500, 1).image();
    let mut seen = Vec::new();
    for (stages, expected) in [(PipelineConfig::Three, 0), (PipelineConfig::Four, 500), (PipelineConfig::Five, 500)] {
        let s = run(stages, &image).stats;
        ensure(s.load_use_stalls == expected, || {
            format!("{stages}: {} stalls, expected {expected}", s.load_use_stalls)
        })?;
        seen.push(s.load_use_stalls);
    }
    let took = within(Duration::from_secs(1), start)?;
    Ok(format!("stalls 3/4/5 = {seen:?} in {took:?}"))
}

/// Final state of one program on every configuration.
struct FinalStates {
    name: String,
    states: Vec<(PipelineConfig, [u32; 32], [u8; 32])>,
}

impl FinalStates {
    fn new(name: String) -> Self {
        FinalStates { name, states: Vec::new() }
    }

    fn record(&mut self, stages: PipelineConfig, report: &RunReport) {
        self.states.push((stages, report.regs, Sha256::digest(&report.dmem).into()));
    }
}

fn cosim_all(name: &str, image: &[u8], finals: &mut Vec<FinalStates>) -> Result<usize, String> {
    let mut f = FinalStates::new(name.to_string());
    let mut retired = 0;
    for stages in PipelineConfig::ALL {
        let v = cosim(&config_for(stages, image.to_vec()), None).map_err(|e| format!("{name} on {stages}: {e}"))?;
        if let Some(d) = &v.divergence {
            return Err(format!("{name} on {stages}: {d}"));
        }
        retired = v.matched;
        f.record(stages, &v.report);
    }
    finals.push(f);
    Ok(retired)
}

fn directed_equivalence(finals: &mut Vec<FinalStates>) -> Verdict {
    let suite = directed_suite();
    ensure(suite.len() >= 47, || format!("only {} directed programs", suite.len()))?;
    let mut covered = BTreeSet::new();
    for p in &suite {
        cosim_all(&p.name, &p.program.image(), finals)?;
        let gold = golden::run(ArchState::new(MemSystem::with_program(&p.program.image()).unwrap(), 0), 1_000_000);
        covered.extend(gold.events.iter().map(|e| decode(e.raw).unwrap().mnemonic()));
    }
    let missing: Vec<_> = BASE_MNEMONICS.iter().filter(|m| !covered.contains(*m)).collect();
    ensure(missing.is_empty(), || format!("instructions never retired: {missing:?}"))?;
    Ok(format!("{} programs, all 40 base instructions retired, identical streams on 3/4/5 stages", suite.len()))
}

const RANDOM_LEN: u32 = 700;

struct RandomCorpus {
    specs: Vec<(f64, u64)>,
    images: Vec<(String, Vec<u8>)>,
}

fn random_corpus() -> RandomCorpus {
    let specs: Vec<_> = [0.0, 0.5, 1.0].into_iter().flat_map(|d| (0..70).map(move |seed| (d, seed))).collect();
    let images = specs
        .iter()
        .map(|&(d, seed)| (format!("random/{d}/{seed}"), gen_random(RANDOM_LEN, seed, d).image()))
        .collect();
    RandomCorpus { specs, images }
}

fn random_cosim(corpus: &RandomCorpus, finals: &mut Vec<FinalStates>) -> Verdict {
    let start = Instant::now();
    let mut retired = 0;
    for (name, image) in &corpus.images {
        retired += cosim_all(name, image, finals)?;
    }
    let took = within(Duration::from_secs(60), start)?;
    ensure(corpus.images.len() >= 200, || format!("only {} programs", corpus.images.len()))?;
    ensure(retired >= 100_000, || format!("only {retired} instructions retired"))?;
    Ok(format!(
        "{} programs, {retired} retired instructions, all configs match golden in {took:?}",
        corpus.images.len()
    ))
}

fn cross_config_state(finals: &[FinalStates]) -> Verdict {
    for f in finals {
        let (_, regs, dmem) = &f.states[0];
        for (stages, r, d) in &f.states[1..] {
            ensure(r == regs, || format!("{}: registers differ on {stages}", f.name))?;
            ensure(d == dmem, || format!("{}: data memory differs on {stages}", f.name))?;
        }
    }
    Ok(format!("{} programs leave identical registers and data memory on 3/4/5 stages", finals.len()))
}

fn trace_hash(cfg: &RunConfig) -> [u8; 32] {
    let mut h = HashWriter(Sha256::new());
    run_program(cfg, Some(&mut h)).expect("program loads");
    h.0.finalize().into()
}

fn deterministic_traces(corpus: &RandomCorpus) -> Verdict {
    let mut runs = 0;
    for ((name, image), &(density, seed)) in corpus.images.iter().zip(&corpus.specs) {
        for stages in PipelineConfig::ALL {
            let a = trace_hash(&config_for(stages, image.clone()));
            let b = trace_hash(&config_for(stages, gen_random(RANDOM_LEN, seed, density).image()));
            ensure(a == b, || format!("{name} on {stages}: trace hashes differ"))?;
            runs += 2;
        }
    }
    Ok(format!("{runs} runs, every pair of trace hashes identical"))
}

fn x0_stays_zero() -> Verdict {
    let program = x0_program();
    let kinds: BTreeSet<_> = program
        .words()
        .iter()
        .filter_map(|&w| decode(w).ok())
        .filter(|d| d.writes_rd && d.rd.is_zero())
        .map(|d| format!("{:?}", d.kind))
        .collect();
    let writing = [
        InstrKind::Lui,
        InstrKind::Auipc,
        InstrKind::Jal,
        InstrKind::Jalr,
        InstrKind::Load,
        InstrKind::AluImm,
        InstrKind::AluReg,
    ];
    for k in writing {
        ensure(kinds.contains(&format!("{k:?}")), || format!("no x0 write of kind {k:?}"))?;
    }
    let mut cycles = 0;
    for stages in PipelineConfig::ALL {
        let mut pipe = Pipeline::new(stages, MemSystem::with_program(&program.image()).unwrap(), 0);
        while pipe.halt_reason().is_none() {
            ensure(cycles < 1_000_000, || "no halt".to_string())?;
            pipe.step_cycle().map_err(|e| e.to_string())?;
            cycles += 1;
            ensure(pipe.regs()[0] == 0, || {
                format!("{stages}: x0 = {:#x} after cycle {}", pipe.regs()[0], pipe.counters().cycles)
            })?;
        }
        ensure(pipe.halt_reason() == Some(HaltReason::Ecall), || format!("{stages}: {:?}", pipe.halt_reason()))?;
    }
    Ok(format!("x0 == 0 after each of {cycles} cycles across 3/4/5 stages"))
}

fn main() -> ExitCode {
    let mut finals = Vec::new();
    let corpus = random_corpus();
    let results: Vec<(u32, &str, Verdict)> = vec![
        (1, "cpi-of-one", cpi_of_one()),
        (2, "taken-branch-penalty", taken_branch_penalty()),
        (3, "load-use-asymmetry", load_use_asymmetry()),
        (4, "directed-suite-equivalence", directed_equivalence(&mut finals)),
        (5, "random-cosim", random_cosim(&corpus, &mut finals)),
        (6, "cross-config-final-state", cross_config_state(&finals)),
        (7, "trace-determinism", deterministic_traces(&corpus)),
        (8, "x0-hardwired", x0_stays_zero()),
    ];

    let mut failed = 0;
    for (n, name, verdict) in &results {
        match verdict {
            Ok(detail) => println!("acceptance {n} {name}: PASS ({detail})"),
            Err(why) => {
                failed += 1;
                println!("acceptance {n} {name}: FAIL ({why})");
            }
        }
    }
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
