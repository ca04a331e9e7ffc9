use std::path::PathBuf;
use std::process::{Command, Output};

fn descrack(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_descrack"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn fixture(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name]
        .iter()
        .collect();
    path.to_str().unwrap().to_owned()
}

#[test]
fn encrypt_classic_vector() {
    let out = descrack(&["encrypt", "0123456789abcdef", "--key", "133457799bbcdff1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "85e813540f0ab405\n");
    assert!(out.stderr.is_empty());
}

#[test]
fn decrypt_inverts_encrypt() {
    let out = descrack(&["decrypt", "85E813540F0AB405", "--key", "133457799BBCDFF1"]);
    assert_eq!(stdout(&out), "0123456789abcdef\n");
    // the 14-digit form of the same key
    let k56 = descrack(&["encrypt", "0123456789abcdef", "--key", "12695bc9b7b7f8"]);
    assert_eq!(stdout(&k56), "85e813540f0ab405\n");
}

#[test]
fn conventional_packing_of_key_one() {
    let out = descrack(&["decrypt", "b6060c26730925bc", "--key", "00000000000001"]);
    assert_eq!(stdout(&out), "5918178daa8978f7\n");
    let out = descrack(&["encrypt", "b6060c26730925bc", "--key", "00000000000001"]);
    assert_eq!(stdout(&out), "12cf4d587bf4eb08\n");
}

#[test]
fn malformed_hex_is_a_usage_error() {
    for args in [
        ["encrypt", "0123456789abcdeg", "--key", "00000000000001"],
        ["encrypt", "0123456789abcdef", "--key", "000000000001"],
        ["decrypt", "0123456789abcd", "--key", "00000000000001"],
    ] {
        let out = descrack(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty());
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn crack_finds_key_from_pairs_file() {
    let out = descrack(&[
        "crack",
        &fixture("key_00000000000001.pairs"),
        "--start",
        "00000000000000",
        "--end",
        "00000000000100",
        "--workers",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.lines().any(|l| l == "match 00000000000001"), "{text}");
    assert!(text.lines().any(|l| l == "keys_tested 256"), "{text}");
}

#[test]
fn crack_with_inline_pair_and_progress() {
    let out = descrack(&[
        "crack",
        "--pair",
        "0123456789abcdef:c87488f246813017",
        "--end",
        "00000000000400",
        "--engine",
        "unrolled",
        "--stop",
        "first",
        "--progress-interval",
        "0.001",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("match 00000000000001\n"));
    let progress = stderr(&out);
    let last = progress.lines().last().unwrap();
    assert!(
        last.starts_with("keys=")
            && last.contains(" rate=")
            && last.contains(" done=")
            && last.contains(" eta=")
    );
}

#[test]
fn crack_range_excluding_the_key_exits_one() {
    let out = descrack(&[
        "crack",
        &fixture("key_00000000000001.pairs"),
        "--start",
        "00000000000002",
        "--end",
        "00000000000200",
        "--progress-interval",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).starts_with("no match\n"));
    assert!(out.stderr.is_empty());
}

#[test]
fn crack_usage_errors() {
    let pairs = fixture("key_00000000000001.pairs");
    for args in [
        vec!["crack", &pairs, "--end", "00000000000100", "--workers", "0"],
        vec!["crack", &pairs],
        vec![
            "crack",
            &pairs,
            "--start",
            "00000000000200",
            "--end",
            "00000000000100",
        ],
        vec!["crack", "/nonexistent/pairs.txt", "--end", "00000000000100"],
        vec![
            "crack",
            &pairs,
            "--end",
            "00000000000100",
            "--engine",
            "quantum",
        ],
        vec!["crack", "--end", "00000000000100"],
    ] {
        let out = descrack(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn crack_resumes_from_checkpoint_and_refuses_foreign_one() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("search.ckpt");
    let ckpt = ckpt.to_str().unwrap();
    let pairs = fixture("key_00000000000001.pairs");
    let args = [
        "crack",
        &pairs,
        "--end",
        "00000000001000",
        "--workers",
        "3",
        "--checkpoint",
        ckpt,
    ];
    let first = descrack(&args);
    assert_eq!(first.status.code(), Some(0));
    assert!(std::fs::read_to_string(ckpt)
        .unwrap()
        .starts_with("fingerprint "));
    let again = descrack(&args);
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(stdout(&again).lines().next(), Some("match 00000000000001"));

    let foreign = descrack(&[
        "crack",
        &pairs,
        "--end",
        "00000000002000",
        "--checkpoint",
        ckpt,
    ]);
    assert_eq!(foreign.status.code(), Some(2));
    assert!(stderr(&foreign).contains("fingerprint"));
}

#[test]
fn bench_prints_one_row_per_engine() {
    let out = descrack(&["bench", "--engine", "rolled", "--seconds", "0.2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 1);
    let cols: Vec<&str> = rows[0].split_whitespace().collect();
    assert_eq!(cols[0], "rolled");
    assert!(cols[3].parse::<f64>().unwrap() > 0.0);

    let out = descrack(&["bench", "--engine", "all", "--seconds", "0.1"]);
    let names: Vec<String> = stdout(&out)
        .lines()
        .skip(1)
        .map(|l| l.split_whitespace().next().unwrap().to_owned())
        .collect();
    assert_eq!(names, ["rolled", "unrolled", "bitsliced"]);

    for args in [
        ["bench", "--engine", "quantum", "--seconds", "1"],
        ["bench", "--engine", "all", "--seconds", "0"],
    ] {
        assert_eq!(descrack(&args).status.code(), Some(2), "{args:?}");
    }
}

fn estimate_field(out: &Output, name: &str) -> f64 {
    stdout(out)
        .lines()
        .find_map(|l| l.strip_prefix(name).map(|v| v.trim().parse().unwrap()))
        .unwrap_or_else(|| panic!("no {name} in {}", stdout(out)))
}

#[test]
fn estimate_reproduces_search_times() {
    let out = descrack(&[
        "estimate",
        "--fpgas",
        "1",
        "--instances",
        "256",
        "--freq-mhz",
        "323.515",
        "--cycles-per-key",
        "1",
        "--fraction",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!((estimate_field(&out, "expected_days") - 5.04).abs() < 0.01);
    assert!((estimate_field(&out, "keys_per_second") - 8.2822e10).abs() < 1e7);

    let out = descrack(&[
        "estimate",
        "--fpgas",
        "120",
        "--instances",
        "4",
        "--freq-mhz",
        "100",
        "--cycles-per-key",
        "1",
    ]);
    assert!((estimate_field(&out, "expected_days") - 8.69).abs() < 0.01);
    let worst = estimate_field(&out, "worst_case_seconds");
    assert!((estimate_field(&out, "expected_seconds") * 2.0 - worst).abs() < 1.0);
}

#[test]
fn estimate_rejects_bad_parameters() {
    for args in [
        vec![
            "estimate",
            "--fpgas",
            "1",
            "--instances",
            "256",
            "--freq-mhz",
            "323.515",
            "--fraction",
            "0",
        ],
        vec![
            "estimate",
            "--fpgas",
            "0",
            "--instances",
            "256",
            "--freq-mhz",
            "323.515",
        ],
        vec![
            "estimate",
            "--fpgas",
            "1",
            "--instances",
            "256",
            "--freq-mhz",
            "-5",
        ],
        vec!["estimate", "--fpgas", "1", "--instances", "256"],
    ] {
        assert_eq!(descrack(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn no_subcommand_is_a_usage_error() {
    assert_eq!(descrack(&[]).status.code(), Some(2));
}
