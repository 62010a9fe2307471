//! Golden runs of the binary: exit-code contract, byte-determinism of
//! emitted certificates, and verification replay from files.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_plhomeo"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("plhomeo-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn distort_bundled_sequence_exits_zero() {
    let cert = tmp("cert.json");
    let out = run(&[
        "distort",
        "--input",
        fixture("sequence4.json").to_str().unwrap(),
        "--out",
        cert.to_str().unwrap(),
        "--samples",
        "40",
    ]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(code(&out), 0, "stdout: {stdout}");
    assert!(stdout.contains("|S| = 10 generators"));
    assert!(stdout.contains("bound 14n+12"));
    assert!(cert.exists());
}

#[test]
fn certificates_are_byte_identical_across_runs() {
    let a = tmp("cert-a.json");
    let b = tmp("cert-b.json");
    for (path, seed) in [(&a, "1"), (&b, "99")] {
        let out = run(&[
            "distort",
            "--input",
            fixture("sequence4.json").to_str().unwrap(),
            "--out",
            path.to_str().unwrap(),
            "--samples",
            "10",
            "--seed",
            seed,
        ]);
        assert_eq!(code(&out), 0);
    }
    // the seed steers sampling only, never the construction
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn verify_replays_and_corruption_exits_one() {
    let cert = tmp("cert-verify.json");
    let out = run(&[
        "distort",
        "--input",
        fixture("sequence4.json").to_str().unwrap(),
        "--out",
        cert.to_str().unwrap(),
        "--samples",
        "10",
    ]);
    assert_eq!(code(&out), 0);
    let ok = run(&["verify", "--input", cert.to_str().unwrap(), "--samples", "25"]);
    assert_eq!(code(&ok), 0);
    // corrupt one word letter: drop the first letter of the last word
    let text = fs::read_to_string(&cert).unwrap();
    let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
    let words = value["words"].as_array_mut().unwrap();
    let letters = words.last_mut().unwrap()["letters"].as_array_mut().unwrap();
    letters.remove(0);
    // keep the stored reduced length consistent so only the evaluation fails
    let reduced: u64 = letters
        .iter()
        .map(|l| l[1].as_i64().unwrap().unsigned_abs())
        .sum();
    let rows = value["ledger"].as_array_mut().unwrap();
    rows.last_mut().unwrap()["reduced"] = serde_json::json!(reduced);
    let broken = tmp("cert-broken.json");
    fs::write(&broken, serde_json::to_string(&value).unwrap()).unwrap();
    let bad = run(&["verify", "--input", broken.to_str().unwrap(), "--samples", "25"]);
    assert_eq!(code(&bad), 1);
    let stdout = String::from_utf8_lossy(&bad.stdout);
    assert!(stdout.contains("FAIL"), "report: {stdout}");
}

#[test]
fn malformed_input_exits_two() {
    let bad = tmp("bad.json");
    fs::write(&bad, r#"[{"breakpoints":[["1/0","0"]],"slope_left":"1","slope_right":"1"}]"#)
        .unwrap();
    let out = run(&["distort", "--input", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let noncanonical = tmp("noncanonical.json");
    fs::write(
        &noncanonical,
        r#"[{"breakpoints":[["0","2/4"]],"slope_left":"1","slope_right":"1"}]"#,
    )
    .unwrap();
    let out = run(&["factorize", "--input", noncanonical.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let out = run(&["verify", "--input", fixture("sequence4.json").to_str().unwrap()]);
    assert_eq!(code(&out), 2, "a sequence file is not a certificate");
    let out = run(&["distort", "--input", tmp("missing.json").to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}

#[test]
fn factorize_round_trips() {
    let out_path = tmp("fact.json");
    let out = run(&[
        "factorize",
        "--input",
        fixture("sequence4.json").to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(&out_path).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(value["anchors"]["x_minus"][0] == serde_json::json!("1"));
    assert!(value["anchors"]["x_plus"][0] == serde_json::json!("3"));
}

#[test]
fn orbits_command_reports_clean_system() {
    let out = run(&[
        "orbits",
        "--intervals",
        "3",
        "--den-bound",
        "64",
        "--depth",
        "12",
        "--window",
        "0",
        "2000",
    ]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(code(&out), 0, "stdout: {stdout}");
    assert!(stdout.contains("interval orbit layout"));
    assert!(stdout.contains("pairwise disjoint"));
}

#[test]
fn counterexample_command_certifies() {
    let out = run(&[
        "counterexample",
        "--input",
        fixture("s3_instance.txt").to_str().unwrap(),
        "--out",
        tmp("agreement.json").to_str().unwrap(),
    ]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(code(&out), 0, "stdout: {stdout}");
    assert!(stdout.contains("brute-force oracle agrees"));
}

#[test]
fn embed_flag_reports_orbit_order() {
    let out = run(&[
        "distort",
        "--input",
        fixture("sequence4.json").to_str().unwrap(),
        "--samples",
        "10",
        "--embed",
    ]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(code(&out), 0, "stdout: {stdout}");
    assert!(stdout.contains("order embedding"));
    assert!(stdout.contains("orbit of 0"));
}

#[test]
fn selftest_passes() {
    let out = run(&["selftest"]);
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("0 failed"));
}
