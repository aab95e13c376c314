//! WebAssembly bindings for the browser demo. Every entry point returns a
//! JSON string; the plain Rust versions are usable (and tested) natively.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use rvpipe::harness::gen::{gen_microbench, gen_random, MicrobenchKind};
use rvpipe::harness::{cosim, run_program, ProgramSource, RunConfig};
use rvpipe::PipelineConfig;

/// Longest trace handed to the page.
pub const MAX_TRACE_LINES: usize = 400;
const MAX_N: u32 = 5_000;

fn stages(n: u32) -> Result<PipelineConfig, String> {
    PipelineConfig::from_stages(n).ok_or_else(|| format!("stages must be 3, 4 or 5, got {n}"))
}

fn microbench(kind: &str, n: u32) -> Result<Vec<u8>, String> {
    if n == 0 || n > MAX_N {
        return Err(format!("n must be in 1..={MAX_N}"));
    }
    let kind: MicrobenchKind = kind.parse()?;
    Ok(gen_microbench(kind, n, 1).image())
}

/// Runs a microbenchmark and returns its stats plus the first cycles of its trace.
pub fn trace_json(kind: &str, n: u32, stage_count: u32) -> Result<String, String> {
    let config = stages(stage_count)?;
    let cfg = RunConfig::new(config, ProgramSource::Bytes(microbench(kind, n)?));
    let mut out = Vec::new();
    let report = run_program(&cfg, Some(&mut out)).map_err(|e| e.to_string())?;
    let text = String::from_utf8(out).map_err(|e| e.to_string())?;
    let trace: Vec<&str> = text.lines().take(MAX_TRACE_LINES).collect();
    Ok(json!({
        "stages": config.stage_names(),
        "truncated": report.stats.cycles as usize > trace.len(),
        "stats": report.stats,
        "trace": trace,
    })
    .to_string())
}

/// Stats of one microbenchmark on every pipeline depth.
pub fn sweep_json(kind: &str, n: u32) -> Result<String, String> {
    let image = microbench(kind, n)?;
    let rows = PipelineConfig::ALL
        .iter()
        .map(|&c| {
            let report = run_program(&RunConfig::new(c, ProgramSource::Bytes(image.clone())), None)
                .map_err(|e| e.to_string())?;
            serde_json::to_value(report.stats).map_err(|e| e.to_string())
        })
        .collect::<Result<Vec<Value>, String>>()?;
    Ok(Value::Array(rows).to_string())
}

/// Co-simulates one random program against the golden model on every depth.
pub fn cosim_json(seed: u32, n: u32, density: f64) -> Result<String, String> {
    if n == 0 || n > MAX_N {
        return Err(format!("n must be in 1..={MAX_N}"));
    }
    if !(0.0..=1.0).contains(&density) {
        return Err(format!("density must be in [0, 1], got {density}"));
    }
    let image = gen_random(n, seed as u64, density).image();
    let rows = PipelineConfig::ALL
        .iter()
        .map(|&c| {
            let v = cosim(&RunConfig::new(c, ProgramSource::Bytes(image.clone())), None).map_err(|e| e.to_string())?;
            Ok(json!({
                "stages": c.stages(),
                "passed": v.passed(),
                "matched": v.matched,
                "divergence": v.divergence.map(|d| d.to_string()),
                "stats": v.report.stats,
            }))
        })
        .collect::<Result<Vec<Value>, String>>()?;
    Ok(json!({ "instructions": image.len() / 4, "configs": rows }).to_string())
}

fn js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = runTrace)]
pub fn run_trace(kind: &str, n: u32, stages: u32) -> Result<String, JsError> {
    js(trace_json(kind, n, stages))
}

#[wasm_bindgen(js_name = cpiSweep)]
pub fn cpi_sweep(kind: &str, n: u32) -> Result<String, JsError> {
    js(sweep_json(kind, n))
}

#[wasm_bindgen(js_name = randomCosim)]
pub fn random_cosim(seed: u32, n: u32, density: f64) -> Result<String, JsError> {
    js(cosim_json(seed, n, density))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Value {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn trace_has_stage_columns_and_stats() {
        let v = parse(&trace_json("taken_branch_loop", 5, 5).unwrap());
        assert_eq!(v["stages"], json!(["IF", "ID", "EX", "MEM", "WB"]));
        assert_eq!(v["stats"]["taken_branch_flush_bubbles"], 10);
        let lines = v["trace"].as_array().unwrap();
        assert_eq!(lines.len() as u64, v["stats"]["cycles"].as_u64().unwrap());
        assert_eq!(lines[0], "cyc 1 | IF 00000000 | ID ----- | EX ----- | MEM ----- | WB -----");
        assert_eq!(v["truncated"], false);
    }

    #[test]
    fn long_traces_are_truncated() {
        let v = parse(&trace_json("straightline", 1000, 3).unwrap());
        assert_eq!(v["trace"].as_array().unwrap().len(), MAX_TRACE_LINES);
        assert_eq!(v["truncated"], true);
    }

    #[test]
    fn sweep_covers_every_depth() {
        let v = parse(&sweep_json("load_use_pairs", 20).unwrap());
        let stalls: Vec<u64> = v.as_array().unwrap().iter().map(|r| r["load_use_stalls"].as_u64().unwrap()).collect();
        assert_eq!(stalls, [0, 20, 20]);
    }

    #[test]
    fn cosim_passes_everywhere() {
        let v = parse(&cosim_json(7, 200, 1.0).unwrap());
        let configs = v["configs"].as_array().unwrap();
        assert_eq!(configs.len(), 3);
        assert!(configs.iter().all(|c| c["passed"] == true && c["divergence"].is_null()));
    }

    #[test]
    fn bad_inputs_are_errors() {
        assert!(trace_json("straightline", 10, 6).is_err());
        assert!(trace_json("bogus", 10, 5).is_err());
        assert!(sweep_json("straightline", 0).is_err());
        assert!(cosim_json(1, 10, 1.5).is_err());
        assert!(cosim_json(1, MAX_N + 1, 0.5).is_err());
    }
}
