use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use serde::Serialize;

use rvpipe::harness::{cosim, run_program, GenKind, GenSpec, HarnessError, ProgramSource, RunConfig, RunStats};
use rvpipe::mem::{MemFault, MemSystem};
use rvpipe::{Fault, HaltReason, PipelineConfig, RunOutcome};

/// Process exit codes other than the guest's own exit code.
mod exit {
    pub const USAGE: u8 = 2;
    pub const NO_INPUT: u8 = 66;
    pub const IO: u8 = 74;
    pub const COSIM_MISMATCH: u8 = 125;
    pub const STEP_LIMIT: u8 = 124;
    pub const ILLEGAL_INSTRUCTION: u8 = 132;
    pub const MISALIGNED: u8 = 135;
    pub const OUT_OF_RANGE: u8 = 139;
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StatsFormat {
    Json,
    Csv,
}

fn parse_hex(s: &str) -> Result<u32, String> {
    let digits = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")).unwrap_or(s);
    u32::from_str_radix(digits, 16).map_err(|e| format!("`{s}` is not a 32-bit hex value: {e}"))
}

fn parse_stages(s: &str) -> Result<PipelineConfig, String> {
    s.parse().ok().and_then(PipelineConfig::from_stages).ok_or_else(|| format!("`{s}`: expected 3, 4 or 5"))
}

/// Cycle-accurate RV32I pipeline simulator.
///
/// Prints one stats record to stdout. The exit status is the guest's exit
/// code (a0) when it halts with ecall or ebreak.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Cli {
    /// Pipeline depth.
    #[arg(long, default_value = "5", value_parser = parse_stages)]
    stages: PipelineConfig,

    /// Flat little-endian RV32I binary.
    #[arg(long, conflicts_with = "gen", required_unless_present = "gen")]
    image: Option<PathBuf>,

    /// Generated program: <straightline|load_use_pairs|taken_branch_loop|random>:<n>:<seed>.
    #[arg(long, value_name = "KIND:N:SEED")]
    gen: Option<String>,

    /// Dependency density for `random` programs.
    #[arg(long, default_value_t = GenSpec::DEFAULT_DENSITY, requires = "gen")]
    density: f64,

    /// Load address of the image in instruction memory (hex).
    #[arg(long, default_value = "0", value_parser = parse_hex)]
    offset: u32,

    /// Initial pc (hex); defaults to the load offset.
    #[arg(long, value_parser = parse_hex)]
    entry: Option<u32>,

    #[arg(long, default_value_t = RunConfig::DEFAULT_MAX_CYCLES)]
    max_cycles: u64,

    /// Per-cycle stage occupancy, to stderr or to the given file.
    #[arg(long, value_name = "PATH", num_args = 0..=1, require_equals = true, default_missing_value = "-")]
    trace: Option<String>,

    /// Run the golden model in lock-step and compare retirements.
    #[arg(long)]
    cosim: bool,

    #[arg(long, default_value_t = MemSystem::DEFAULT_SIZE)]
    imem_size: usize,

    #[arg(long, default_value_t = MemSystem::DEFAULT_SIZE)]
    dmem_size: usize,

    /// Single memory for code and data (sized by --imem-size).
    #[arg(long)]
    unified: bool,

    #[arg(long, value_enum, default_value = "json")]
    stats_format: StatsFormat,

    /// Also write the program image to this file.
    #[arg(long, value_name = "PATH")]
    emit_image: Option<PathBuf>,
}

#[derive(Serialize)]
struct Record {
    stages: u32,
    cycles: u64,
    retired: u64,
    cpi: Option<f64>,
    taken_branch_flush_bubbles: u64,
    load_use_stalls: u64,
    exit_code: u32,
    halt_reason: String,
    cosim: Option<&'static str>,
    divergence: Option<String>,
}

impl Record {
    fn new(s: RunStats) -> Self {
        Record {
            stages: s.stages,
            cycles: s.cycles,
            retired: s.retired,
            cpi: s.cpi,
            taken_branch_flush_bubbles: s.taken_branch_flush_bubbles,
            load_use_stalls: s.load_use_stalls,
            exit_code: s.exit_code,
            halt_reason: s.halt_reason,
            cosim: None,
            divergence: None,
        }
    }
}

fn write_record(record: &Record, format: StatsFormat) -> io::Result<()> {
    let stdout = io::stdout().lock();
    match format {
        StatsFormat::Json => {
            let mut out = stdout;
            serde_json::to_writer(&mut out, record)?;
            writeln!(out)
        }
        StatsFormat::Csv => {
            let mut w = csv::Writer::from_writer(stdout);
            w.serialize(record)?;
            w.flush()
        }
    }
}

fn outcome_code(outcome: RunOutcome, exit_code: u32) -> u8 {
    match outcome {
        RunOutcome::Halted(HaltReason::Ecall | HaltReason::Ebreak) => exit_code as u8,
        RunOutcome::Halted(HaltReason::Trap(t)) => match t.fault {
            Fault::IllegalInstruction(_) => exit::ILLEGAL_INSTRUCTION,
            Fault::Memory(MemFault::Misaligned { .. }) => exit::MISALIGNED,
            Fault::Memory(MemFault::OutOfRange { .. }) => exit::OUT_OF_RANGE,
        },
        RunOutcome::StepLimitExceeded => exit::STEP_LIMIT,
    }
}

fn error_code(e: &HarnessError) -> u8 {
    match e {
        HarnessError::Io { .. } => exit::NO_INPUT,
        HarnessError::Trace(_) => exit::IO,
        HarnessError::MemConfig(_)
        | HarnessError::ImageDoesNotFit(_)
        | HarnessError::BadGenSpec(_)
        | HarnessError::ZeroMaxCycles => exit::USAGE,
        HarnessError::StepLimitExceeded { .. } => exit::STEP_LIMIT,
        HarnessError::Trap { trap, .. } => outcome_code(RunOutcome::Halted(HaltReason::Trap(*trap)), 0),
    }
}

fn run(cli: Cli) -> Result<u8, (u8, String)> {
    let source = match (&cli.image, &cli.gen) {
        (Some(path), _) => ProgramSource::Image(path.clone()),
        (None, Some(spec)) => {
            let mut spec: GenSpec = spec.parse().map_err(|e: HarnessError| (exit::USAGE, e.to_string()))?;
            if let GenKind::Random(_) = spec.kind {
                if !(0.0..=1.0).contains(&cli.density) {
                    return Err((exit::USAGE, format!("density {} is outside [0, 1]", cli.density)));
                }
                spec.kind = GenKind::Random(cli.density);
            }
            ProgramSource::Generated(spec)
        }
        (None, None) => unreachable!("clap requires one program source"),
    };
    let fail = |e: HarnessError| (error_code(&e), e.to_string());

    if let Some(path) = &cli.emit_image {
        let image = source.load().map_err(fail)?;
        std::fs::write(path, image).map_err(|e| (exit::IO, format!("cannot write {}: {e}", path.display())))?;
    }

    let cfg = RunConfig {
        offset: cli.offset,
        entry: cli.entry.unwrap_or(cli.offset),
        max_cycles: cli.max_cycles,
        imem_size: cli.imem_size,
        dmem_size: cli.dmem_size,
        unified: cli.unified,
        ..RunConfig::new(cli.stages, source)
    };

    let mut trace_sink: Option<Box<dyn Write>> = match cli.trace.as_deref() {
        None => None,
        Some("-") => Some(Box::new(BufWriter::new(io::stderr().lock()))),
        Some(path) => {
            let f = File::create(path).map_err(|e| (exit::IO, format!("cannot create {path}: {e}")))?;
            Some(Box::new(BufWriter::new(f)))
        }
    };
    let trace = trace_sink.as_mut().map(|w| w.as_mut() as &mut dyn Write);

    let (record, code) = if cli.cosim {
        let v = cosim(&cfg, trace).map_err(fail)?;
        let code =
            if v.passed() { outcome_code(v.report.outcome, v.report.stats.exit_code) } else { exit::COSIM_MISMATCH };
        let mut record = Record::new(v.report.stats);
        record.cosim = Some(if v.divergence.is_none() { "PASS" } else { "FAIL" });
        record.divergence = v.divergence.map(|d| d.to_string());
        (record, code)
    } else {
        let report = run_program(&cfg, trace).map_err(fail)?;
        let code = outcome_code(report.outcome, report.stats.exit_code);
        (Record::new(report.stats), code)
    };
    if let Some(mut w) = trace_sink {
        w.flush().map_err(|e| (exit::IO, format!("cannot write trace: {e}")))?;
    }
    if let Some(d) = &record.divergence {
        eprintln!("cosim FAIL: {d}");
    }
    write_record(&record, cli.stats_format).map_err(|e| (exit::IO, format!("cannot write stats: {e}")))?;
    Ok(code)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err((code, msg)) => {
            eprintln!("rvpipe: {msg}");
            ExitCode::from(code)
        }
    }
}
