//! Per-cycle occupancy trace lines and the counters they imply.

use crate::event::HaltReason;
use crate::pipeline::{CycleReport, Occupancy, PerfCounters, PipelineConfig};

const EMPTY: &str = "-----";
const BUBBLE: &str = "bubble";

/// `cyc 7 | IF 0000001c | ID bubble | EX 00000014 | MEM ----- | WB 0000000c`
pub fn format_trace_line(config: PipelineConfig, report: &CycleReport) -> String {
    let mut line = format!("cyc {}", report.cycle);
    for (name, occ) in config.stage_names().iter().zip(&report.occupancy) {
        line.push_str(" | ");
        line.push_str(name);
        line.push(' ');
        match occ {
            Occupancy::Empty => line.push_str(EMPTY),
            Occupancy::Bubble => line.push_str(BUBBLE),
            Occupancy::Instr(pc) => line.push_str(&format!("{pc:08x}")),
        }
    }
    line
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Cell {
    Empty,
    Bubble,
    Pc(u32),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("malformed trace line {line}: {reason}")]
pub struct TraceParseError {
    pub line: usize,
    pub reason: String,
}

fn parse_line(n: usize, line: &str, stages: usize) -> Result<Vec<Cell>, TraceParseError> {
    let err = |reason: &str| TraceParseError { line: n, reason: reason.to_string() };
    let mut cols = line.split(" | ");
    if !cols.next().is_some_and(|c| c.starts_with("cyc ")) {
        return Err(err("missing cycle column"));
    }
    let cells: Vec<Cell> = cols
        .map(|c| match c.split_once(' ').map(|(_, v)| v) {
            Some(EMPTY) => Ok(Cell::Empty),
            Some(BUBBLE) => Ok(Cell::Bubble),
            Some(v) => u32::from_str_radix(v, 16).map(Cell::Pc).map_err(|_| err("bad stage value")),
            None => Err(err("bad stage column")),
        })
        .collect::<Result<_, _>>()?;
    if cells.len() != stages {
        return Err(err("wrong number of stages"));
    }
    Ok(cells)
}

/// Recomputes the performance counters of a halted run from its trace.
///
/// An instruction retires when it occupies the last stage, except for the
/// faulting instruction of a trap halt. Every taken redirect leaves exactly
/// one bubble in ID; every interlock holds ID and sends a bubble into EX.
pub fn stats_from_trace<S: AsRef<str>>(
    config: PipelineConfig,
    lines: &[S],
    halt: Option<HaltReason>,
) -> Result<PerfCounters, TraceParseError> {
    let stages = config.stages() as usize;
    let rows =
        lines.iter().enumerate().map(|(i, l)| parse_line(i + 1, l.as_ref(), stages)).collect::<Result<Vec<_>, _>>()?;

    let mut c = PerfCounters { cycles: rows.len() as u64, ..Default::default() };
    c.retired = rows.iter().filter(|r| matches!(r[stages - 1], Cell::Pc(_))).count() as u64;
    if matches!(halt, Some(HaltReason::Trap(_))) {
        c.retired = c.retired.saturating_sub(1);
    }
    c.taken_branch_flushes = 2 * rows.iter().filter(|r| r[1] == Cell::Bubble).count() as u64;
    c.load_use_stalls = rows
        .windows(2)
        .filter(|w| matches!(w[0][1], Cell::Pc(_)) && w[1][1] == w[0][1] && w[1][2] == Cell::Bubble)
        .count() as u64;
    Ok(c)
}
