use std::path::Path;
use std::process::Command;

use dfjss_cli::{run, CliError};

fn dfjss(args: &[&str]) -> Result<String, CliError> {
    let mut out = Vec::new();
    let mut argv = vec!["dfjss"];
    argv.extend_from_slice(args);
    run(argv, &mut out)?;
    Ok(String::from_utf8(out).unwrap())
}

fn code(args: &[&str]) -> i32 {
    dfjss(args).map(|_| 0).unwrap_or_else(|e| e.exit_code())
}

fn small_manifest(dir: &Path, init: &str, provider: &str) -> String {
    let mock = dir.join("mock");
    std::fs::create_dir_all(&mock).unwrap();
    let text = format!(
        r#"runs = 2
master_seed = 3
init = "{init}"
n_requested = 2
out = "{out}"

[scenario]
name = "small"
objectives = ["Fmean", "WTmean"]
lambdas = [0.5, 0.5]
utilization = 0.9
training_seeds = [1, 2]
test_seeds = [10001]

[gp]
population_size = 8
generations = 2

[sim]
total_jobs = 150
warmup_jobs = 30

[provider]
kind = "{provider}"
mock_dir = "{mock}"
"#,
        out = dir.join("out").display(),
        mock = mock.display(),
    );
    let p = dir.join("m.toml");
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn help_and_usage_errors() {
    assert!(dfjss(&["--help"]).unwrap().contains("gen-instance"));
    assert_eq!(code(&["evolve", "--no-such-flag"]), 2);
    assert_eq!(code(&["frobnicate"]), 2);
    assert_eq!(code(&["evolve", "--init", "psychic"]), 2);
}

#[test]
fn instance_then_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("i.jsonl");
    let rules = dir.path().join("r.txt");
    let trace = dir.path().join("t.csv");
    std::fs::write(&rules, "routing: WIQ\nsequencing: PT\n\nrouting: NIQ\nsequencing: SLACK\n").unwrap();
    let a = inst.to_str().unwrap();
    dfjss(&["gen-instance", "--seed", "4", "--jobs", "120", "--out", a]).unwrap();
    let first = std::fs::read(&inst).unwrap();
    dfjss(&["gen-instance", "--seed", "4", "--jobs", "120", "--out", a]).unwrap();
    assert_eq!(first, std::fs::read(&inst).unwrap());
    let out = dfjss(&["simulate", "--rules", rules.to_str().unwrap(), "--instance", a, "--trace", trace.to_str().unwrap()])
        .unwrap();
    assert_eq!(out.lines().filter(|l| l.starts_with("Fmean ")).count(), 2);
    assert!(dir.path().join("t-0.csv").is_file() && dir.path().join("t-1.csv").is_file());
}

#[test]
fn bad_inputs_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(code(&["gen-instance", "--utilization", "1.5", "--out", p.join("x").to_str().unwrap()]), 2);
    assert_eq!(code(&["evolve", "--scenario", "Fmean-Nope@0.9"]), 2);
    let missing = p.join("absent.toml");
    assert_eq!(code(&["evolve", "--config", missing.to_str().unwrap()]), 2);
    std::fs::write(p.join("junk.jsonl"), "not json\n").unwrap();
    std::fs::write(p.join("r.txt"), "routing: WIQ\nsequencing: PT\n").unwrap();
    assert_eq!(
        code(&["simulate", "--rules", p.join("r.txt").to_str().unwrap(), "--instance", p.join("junk.jsonl").to_str().unwrap()]),
        4
    );
    let glob = format!("{}/nothing/*.json", p.display());
    assert_eq!(code(&["compare", "--records", &glob, "--out", p.join("cmp").to_str().unwrap()]), 4);
}

#[test]
fn provider_failures_exit_3_and_empty_replies_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let m = small_manifest(dir.path(), "llm", "mock");
    let seeds = dir.path().join("seeds.txt");
    let s = seeds.to_str().unwrap();
    // No canned reply at all.
    assert_eq!(code(&["init-llm", "--config", &m, "--out", s]), 3);
    assert_eq!(code(&["evolve", "--config", &m]), 3);
    std::fs::write(dir.path().join("mock/init.txt"), "no rules here, sorry").unwrap();
    assert_eq!(code(&["init-llm", "--config", &m, "--out", s]), 4);
    assert!(dir.path().join("seeds.rejections.txt").is_file());

    let openai = small_manifest(dir.path(), "random", "openai");
    std::fs::write(dir.path().join("best.txt"), "routing: WIQ\nsequencing: PT\n").unwrap();
    let report = dir.path().join("report.md");
    let err = dfjss(&[
        "explain",
        "--config",
        &openai,
        "--rules",
        dir.path().join("best.txt").to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
        "--no-test",
    ]);
    // Only meaningful when no key is configured in the environment.
    if std::env::var_os("OPENAI_API_KEY").is_none() {
        assert_eq!(err.unwrap_err().exit_code(), 3);
        let text = std::fs::read_to_string(&report).unwrap();
        assert!(text.contains("Narrative unavailable") && text.contains("| WIQ | 1 | 0 | 1 |"));
    }
    assert_eq!(code(&["init-llm", "--config", &m, "--provider", "mock", "--mock-dir", "/definitely/absent", "--out", s]), 2);
}

#[test]
fn evolve_then_compare() {
    let dir = tempfile::tempdir().unwrap();
    let m = small_manifest(dir.path(), "random", "mock");
    std::fs::write(dir.path().join("seeds.txt"), "routing: WIQ + PT + TRANT\nsequencing: PT\n").unwrap();
    dfjss(&["evolve", "--config", &m, "--jobs", "2"]).unwrap();
    dfjss(&["evolve", "--config", &m, "--seeds", dir.path().join("seeds.txt").to_str().unwrap()]).unwrap();
    let gp = dir.path().join("out/GP/small");
    for f in ["run-000.json", "run-001.json", "run-000.log.csv", "run-000.best.txt", "run-000.timing.csv"] {
        assert!(gp.join(f).is_file(), "{f}");
    }
    let log = std::fs::read_to_string(gp.join("run-000.log.csv")).unwrap();
    assert!(log.starts_with("generation,instance_seed,best,mean,diversity,"));
    assert_eq!(log.lines().count(), 3);

    let records = format!("{}/out/*/*/run-*.json", dir.path().display());
    let cmp = dir.path().join("cmp");
    let out = dfjss(&["compare", "--records", &records, "--out", cmp.to_str().unwrap()]).unwrap();
    assert_eq!(out.lines().count(), 6);
    let table = std::fs::read_to_string(cmp.join("comparison.csv")).unwrap();
    assert!(table.starts_with("scenario,GP,Seeded-GP\n"));
    assert_eq!(code(&["compare", "--records", &records, "--baseline", "Nope", "--out", cmp.to_str().unwrap()]), 4);
}

#[test]
fn binary_reports_exit_status() {
    let bin = env!("CARGO_BIN_EXE_dfjss");
    let st = Command::new(bin).args(["compare", "--records", "/nonexistent/*.json", "--out", "/tmp/x"]).output().unwrap();
    assert_eq!(st.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&st.stderr).starts_with("dfjss: data error"));
    let st = Command::new(bin).arg("--version").output().unwrap();
    assert_eq!(st.status.code(), Some(0));
}
