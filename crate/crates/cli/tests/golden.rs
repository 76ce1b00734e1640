use std::path::PathBuf;
use std::process::{Command, Output};

fn dir(sub: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join(sub)
}

fn fixture(name: &str) -> String {
    dir("fixtures").join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hadamard"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn assert_golden(args: &[&str], golden: &str, code: i32) {
    let out = run(args);
    assert_eq!(
        out.status.code(),
        Some(code),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let expected = std::fs::read_to_string(dir("golden").join(golden)).unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), expected, "{golden}");
}

#[test]
fn demo_golden() {
    assert_golden(&["demo"], "demo.json", 0);
}

#[test]
fn check_goldens() {
    let (a, b) = (fixture("a.json"), fixture("b.json"));
    assert_golden(
        &["check", "--chain", "huang", "--in", &a, "--in", &b],
        "check_huang.json",
        0,
    );
    assert_golden(
        &["check", "--chain", "audenaert", "--in", &a, "--in", &b],
        "check_audenaert.json",
        0,
    );
    assert_golden(
        &[
            "check",
            "--chain",
            "two_matrix_t",
            "--t",
            "1.5",
            "--in",
            &a,
            "--in",
            &b,
        ],
        "check_two_matrix_t.json",
        0,
    );
}

#[test]
fn scan_goldens() {
    let ones = fixture("ones.json");
    assert_golden(
        &["scan", "--in", &ones, "--grid", "1:4:4", "--format", "csv"],
        "scan_ones.csv",
        0,
    );
    let (a, b) = (fixture("a.json"), fixture("b.json"));
    assert_golden(&["scan", "--in", &a, "--in", &b], "scan_ab.json", 0);
    let shift = fixture("shift.json");
    assert_golden(
        &[
            "scan", "--in", &shift, "--fn", "numrad", "--grid", "1:4:4", "--format", "csv",
        ],
        "scan_numrad_shift.csv",
        0,
    );
}

#[test]
fn spectral_goldens() {
    let a = fixture("a.json");
    let shift = fixture("shift.json");
    assert_golden(
        &["spectral", "--fn", "rho", "--in", &a],
        "spectral_rho_a.json",
        0,
    );
    assert_golden(
        &["spectral", "--fn", "norm2", "--in", &a],
        "spectral_norm2_a.json",
        0,
    );
    assert_golden(
        &["spectral", "--fn", "numrad", "--in", &shift],
        "spectral_numrad_shift.json",
        0,
    );
    assert_golden(
        &["spectral", "--fn", "maxtimes", "--in", &a],
        "spectral_maxtimes_a.json",
        0,
    );
}

#[test]
fn output_is_byte_stable() {
    let (a, b) = (fixture("a.json"), fixture("b.json"));
    let args = ["check", "--chain", "peperko_mix", "--in", &a, "--in", &b];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

fn assert_code(args: &[&str], code: i32, stderr_has: &str) {
    let out = run(args);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert_eq!(out.status.code(), Some(code), "{args:?}: {stderr}");
    assert!(stderr.contains(stderr_has), "{args:?}: {stderr}");
}

#[test]
fn usage_and_validation_errors_exit_2() {
    let a = fixture("a.json");
    assert_code(
        &["spectral", "--fn", "rho", "--in", &fixture("bad.json")],
        2,
        "non-negative",
    );
    assert_code(&["check", "--chain", "nope", "--in", &a], 2, "audenaert");
    assert_code(
        &["check", "--chain", "audenaert", "--in", &a],
        2,
        "exactly 2",
    );
    assert_code(
        &["check", "--chain", "genP1_rho", "--in", &a, "--in", &a],
        2,
        "t is required",
    );
    assert_code(
        &["scan", "--in", &a, "--grid", "1:2"],
        2,
        "start:stop:count",
    );
    assert_code(&["spectral", "--fn", "rho"], 2, "--in");
    assert_code(
        &["spectral", "--fn", "rho", "--in", "/nonexistent.json"],
        2,
        "nonexistent",
    );
    assert_code(
        &["kernel", "--formula", "i +", "--size", "2"],
        2,
        "offset 3",
    );
    assert_code(
        &["search", "--target", "inequivalence", "--density", "0"],
        2,
        "density",
    );
}

#[test]
fn findings_exit_1() {
    let out = run(&[
        "search",
        "--target",
        "jordan_naive",
        "--n",
        "2",
        "--density",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["kind"], "jordan_naive_violation");
}

#[test]
fn exhausted_search_exits_0_and_persists() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("findings.jsonl");
    let corpus_arg = corpus.to_string_lossy().into_owned();
    let out = run(&[
        "search",
        "--target",
        "inequivalence",
        "--n",
        "1",
        "--trials",
        "50",
        "--findings",
        &corpus_arg,
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&corpus).unwrap();
    assert_eq!(text.lines().count(), 1);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["exhausted"], "inequivalence");
}

#[test]
fn overflow_exits_3() {
    let big = fixture("big.json");
    assert_code(
        &[
            "check",
            "--chain",
            "spectral_map_exp",
            "--in",
            &big,
            "--in",
            &big,
        ],
        3,
        "overflow",
    );
}

#[test]
fn kernel_and_out_flag() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("k.json");
    let path_arg = path.to_string_lossy().into_owned();
    let out = run(&[
        "--out",
        &path_arg,
        "kernel",
        "--formula",
        "1",
        "--formula",
        "4*x*y",
        "--n",
        "64",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["holds"], true);
    assert_eq!(v["params"]["n"], 64);

    let out = run(&[
        "kernel",
        "--formula",
        "2^(-(i+j))",
        "--size",
        "2",
        "--size",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rho = v[1]["rho"]["value"].as_f64().unwrap();
    assert!((rho - 0.33203125).abs() < 1e-12);
}
