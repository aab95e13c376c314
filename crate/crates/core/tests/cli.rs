use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn rvpipe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rvpipe")).args(args).output().expect("binary runs")
}

fn stats(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn write_words(dir: &Path, name: &str, words: &[u32]) -> String {
    let path = dir.join(name);
    std::fs::write(&path, words.iter().flat_map(|w| w.to_le_bytes()).collect::<Vec<_>>()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn exit_status_mirrors_a0() {
    let dir = tempfile::tempdir().unwrap();
    // addi a0, x0, 42; ecall
    let image = write_words(dir.path(), "p.bin", &[0x02a0_0513, 0x0000_0073]);
    for stages in ["3", "4", "5"] {
        let out = rvpipe(&["--stages", stages, "--image", &image]);
        assert_eq!(out.status.code(), Some(42));
        let s = stats(&out);
        assert_eq!(s["exit_code"], 42);
        assert_eq!(s["retired"], 2);
        assert_eq!(s["halt_reason"], "ecall");
        assert_eq!(s["stages"].as_u64().unwrap().to_string(), stages);
    }
}

#[test]
fn fault_classes_have_distinct_codes() {
    let dir = tempfile::tempdir().unwrap();
    let illegal = write_words(dir.path(), "illegal.bin", &[0x0000_0000]);
    // addi x1, x0, 2; lw x2, 0(x1)
    let misaligned = write_words(dir.path(), "misaligned.bin", &[0x0020_0093, 0x0000_a103]);
    // lui x1, 0x100; lw x2, 0(x1)
    let out_of_range = write_words(dir.path(), "oor.bin", &[0x0010_00b7, 0x0000_a103]);
    // jal x0, 0
    let spin = write_words(dir.path(), "spin.bin", &[0x0000_006f]);

    let code = |args: &[&str]| rvpipe(args).status.code();
    assert_eq!(code(&["--image", &illegal]), Some(132));
    assert_eq!(code(&["--image", &misaligned]), Some(135));
    assert_eq!(code(&["--image", &out_of_range]), Some(139));
    assert_eq!(code(&["--image", &spin, "--max-cycles", "100"]), Some(124));
    assert_eq!(code(&["--image", "/definitely/not/here.bin"]), Some(66));
    assert_eq!(code(&["--stages", "6", "--gen", "straightline:4:0"]), Some(2));
    assert_eq!(code(&["--gen", "straightline:0:0"]), Some(2));
    assert_eq!(code(&[]), Some(2));

    let s = stats(&rvpipe(&["--image", &illegal]));
    assert_eq!(s["retired"], 0);
    assert!(s["halt_reason"].as_str().unwrap().contains("illegal instruction"));
}

#[test]
fn generated_microbenchmarks_report_counters() {
    let out = rvpipe(&["--stages", "4", "--gen", "load_use_pairs:50:1", "--cosim"]);
    let s = stats(&out);
    // only the low byte of a0 survives as a process status
    assert_eq!(out.status.code().map(|c| c as u64), s["exit_code"].as_u64().map(|c| c & 0xff));
    assert_eq!(s["load_use_stalls"], 50);
    assert_eq!(s["cosim"], "PASS");
    assert!(s["divergence"].is_null());

    let s = stats(&rvpipe(&["--stages", "3", "--gen", "taken_branch_loop:10:1"]));
    assert_eq!(s["taken_branch_flush_bubbles"], 20);
    let cycles = s["cycles"].as_u64().unwrap();
    assert_eq!(cycles, s["retired"].as_u64().unwrap() + 2 + 20);
    let cpi = s["cpi"].as_f64().unwrap();
    assert!((cpi - cycles as f64 / s["retired"].as_f64().unwrap()).abs() < 1e-12);
}

#[test]
fn csv_stats() {
    let out = rvpipe(&["--gen", "straightline:10:0", "--stats-format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("stages,cycles,retired,cpi,taken_branch_flush_bubbles,load_use_stalls,exit_code,halt_reason,cosim,divergence")
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&row[..3], ["5", "15", "11"]);
    assert_eq!(lines.next(), None);
}

#[test]
fn trace_goes_to_stderr_or_file() {
    let out = rvpipe(&["--stages", "3", "--gen", "straightline:2:0", "--trace"]);
    let stderr = String::from_utf8_lossy(&out.stderr);
    let lines: Vec<&str> = stderr.lines().collect();
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[0], "cyc 1 | IF 00000000 | ID ----- | EX -----");
    assert_eq!(lines[4], "cyc 5 | IF 00000010 | ID 0000000c | EX 00000008");
    // stdout is still a single record
    assert_eq!(stats(&out)["cycles"], 5);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.txt");
    let arg = format!("--trace={}", path.display());
    let out = rvpipe(&["--stages", "5", "--gen", "taken_branch_loop:3:0", &arg]);
    assert!(out.stderr.is_empty());
    let trace = std::fs::read_to_string(&path).unwrap();
    assert_eq!(trace.lines().count() as u64, stats(&out)["cycles"].as_u64().unwrap());
    assert!(trace.lines().all(|l| l.split(" | ").count() == 6));
    assert!(trace.contains("| ID bubble |"));
}

#[test]
fn offset_and_entry() {
    let dir = tempfile::tempdir().unwrap();
    // addi a0, x0, 1; ecall; addi a0, x0, 2; ecall
    let image = write_words(dir.path(), "p.bin", &[0x0010_0513, 0x0000_0073, 0x0020_0513, 0x0000_0073]);
    assert_eq!(rvpipe(&["--image", &image, "--offset", "0x100"]).status.code(), Some(1));
    assert_eq!(rvpipe(&["--image", &image, "--offset", "100", "--entry", "0x108"]).status.code(), Some(2));
    assert_eq!(rvpipe(&["--image", &image, "--imem-size", "8", "--offset", "0x100"]).status.code(), Some(2));
}

#[test]
fn emit_image_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("random.bin");
    let path = path.to_str().unwrap();
    let a = rvpipe(&["--gen", "random:200:9", "--density", "1.0", "--emit-image", path]);
    let b = rvpipe(&["--image", path, "--cosim"]);
    assert_eq!(a.status.code(), b.status.code());
    let (mut sa, sb) = (stats(&a), stats(&b));
    sa["cosim"] = "PASS".into();
    assert_eq!(sa, sb);
}

#[test]
fn unified_memory_runs() {
    // code sits above the data the program touches
    let out = rvpipe(&["--gen", "random:300:4", "--density", "1", "--unified", "--offset", "0x8000", "--cosim"]);
    assert_eq!(stats(&out)["cosim"], "PASS");
}

#[test]
fn empty_image_traps_on_the_first_fetch() {
    let dir = tempfile::tempdir().unwrap();
    let image = write_words(dir.path(), "empty.bin", &[]);
    let out = rvpipe(&["--image", &image, "--cosim"]);
    assert_eq!(out.status.code(), Some(132));
    let s = stats(&out);
    assert_eq!((s["retired"].as_u64(), s["cosim"].as_str()), (Some(0), Some("PASS")));
    assert_eq!(rvpipe(&["--image", &image, "--max-cycles", "0"]).status.code(), Some(2));
}
