use std::path::Path;
use std::process::{Command, Output};

use fclsh::format::{read_csv, read_dataset, MetricsRow, TruthRow};

fn fclsh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fclsh"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = fclsh(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn code(args: &[&str]) -> i32 {
    fclsh(args).status.code().expect("exit code")
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_owned()
}

/// Generates a small planted workload in `dir`.
fn workload(dir: &Path, seed: &str) {
    ok(&[
        "gen", "--n", "2000", "-d", "64", "--queries", "8", "--planted", "1-6:2",
        "--seed", seed, "--out", &p(dir, "data.fcl"), "--query-out", &p(dir, "q.fcl"),
        "--truth-out", &p(dir, "truth.csv"),
    ]);
}

#[test]
fn generation_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    workload(a.path(), "3");
    workload(b.path(), "3");
    for f in ["data.fcl", "q.fcl", "truth.csv"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
    let data = read_dataset(&a.path().join("data.fcl")).unwrap();
    assert_eq!((data.len(), data.dims()), (2000, 64));
}

#[test]
fn oracle_agrees_with_generated_truth() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    workload(d, "1");
    ok(&["oracle", "--in", &p(d, "data.fcl"), "--queries", &p(d, "q.fcl"), "--r", "6", "--out", &p(d, "oracle.csv")]);
    let gen: Vec<TruthRow> = read_csv(&d.join("truth.csv")).unwrap();
    let scan: Vec<TruthRow> = read_csv(&d.join("oracle.csv")).unwrap();
    assert_eq!(gen, scan);
    // every query has its 12 planted neighbors
    for q in 0..8 {
        assert!(scan.iter().filter(|r| r.query_id == q).count() >= 12);
    }
}

#[test]
fn query_writes_parseable_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    workload(d, "2");
    for method in ["fclsh", "bclsh", "mih", "linear", "classic"] {
        let out = p(d, &format!("{method}.csv"));
        ok(&[
            "query", "--in", &p(d, "data.fcl"), "--queries", &p(d, "q.fcl"), "--truth", &p(d, "truth.csv"),
            "--method", method, "--r", "4", "--repeats", "2", "--out", &out,
        ]);
        let rows: Vec<MetricsRow> = read_csv(Path::new(&out)).unwrap();
        assert_eq!(rows.len(), 8);
        if method != "classic" {
            assert!(rows.iter().all(|r| r.recall == 1.0), "{method}");
        }
        if method == "linear" {
            assert!(rows.iter().all(|r| r.candidates == 2000.0));
        }
        // rows survive a write/read cycle unchanged
        let again = p(d, "again.csv");
        fclsh::format::write_csv(Path::new(&again), &rows).unwrap();
        assert_eq!(read_csv::<MetricsRow>(Path::new(&again)).unwrap(), rows);
    }
    let fast: Vec<MetricsRow> = read_csv(&d.join("fclsh.csv")).unwrap();
    let slow: Vec<MetricsRow> = read_csv(&d.join("bclsh.csv")).unwrap();
    for (f, s) in fast.iter().zip(&slow) {
        assert_eq!((f.collisions, f.candidates, f.found), (s.collisions, s.candidates, s.found));
    }
}

#[test]
fn text_and_binary_formats_convert() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["gen", "--n", "30", "-d", "13", "--queries", "2", "--out", &p(d, "a.txt"), "--query-out", &p(d, "q.fcl")]);
    let text = std::fs::read_to_string(d.join("a.txt")).unwrap();
    assert_eq!(text.lines().count(), 30);
    assert!(text.lines().all(|l| l.len() == 13));
    let data = read_dataset(&d.join("a.txt")).unwrap();
    fclsh::format::write_dataset(&d.join("a.fcl"), &data).unwrap();
    let bytes = std::fs::read(d.join("a.fcl")).unwrap();
    assert_eq!(bytes.len(), 4 + 16 + 30 * 2);
    assert_eq!(read_dataset(&d.join("a.fcl")).unwrap(), data);
}

#[test]
fn binarize_with_holdout() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let rows: String = (0..40).map(|i| format!("{}, {}, {}\n", i, 40 - i, (i * 7) % 11)).collect();
    std::fs::write(d.join("v.csv"), rows).unwrap();
    ok(&["binarize", "--in", &p(d, "v.csv"), "--bits", "32", "--holdout", "5", "--query-out", &p(d, "q.fcl"), "--out", &p(d, "b.fcl")]);
    assert_eq!(read_dataset(&d.join("b.fcl")).unwrap().len(), 35);
    assert_eq!(read_dataset(&d.join("q.fcl")).unwrap().len(), 5);
    std::fs::write(d.join("bad.csv"), "1,2\n3,nan\n").unwrap();
    assert_eq!(code(&["binarize", "--in", &p(d, "bad.csv"), "--bits", "8", "--out", &p(d, "x.fcl")]), 3);
}

#[test]
fn bench_hist_and_build_run() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = ok(&["bench", "--dims", "64", "--radii", "3,4", "--queries", "100", "--out", &p(d, "bench.csv")]);
    assert!(!String::from_utf8_lossy(&out.stdout).contains("MISMATCH"));
    workload(d, "4");
    ok(&["hist", "--in", &p(d, "data.fcl"), "--queries", &p(d, "q.fcl"), "--sample", "500", "--out", &p(d, "hist.csv")]);
    let hist: Vec<fclsh::format::HistRow> = read_csv(&d.join("hist.csv")).unwrap();
    assert_eq!(hist.len(), 65);
    assert_eq!(hist.iter().map(|h| h.count).sum::<u64>(), 8 * 500);
    let out = ok(&["build", "--in", &p(d, "data.fcl"), "--method", "fclsh", "--r", "3", "--plan", "partition:2"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("2 partitions, 6 tables"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    workload(d, "5");
    let data = p(d, "data.fcl");
    let q = p(d, "q.fcl");
    let out = p(d, "m.csv");
    // usage: missing input, bad flag combination, unknown flag
    assert_eq!(code(&["query", "--in", &p(d, "nope.fcl"), "--queries", &q, "--method", "fclsh", "--r", "3", "--out", &out]), 2);
    assert_eq!(code(&["query", "--in", &data, "--queries", &q, "--method", "mih", "--r", "3", "--tables", "4", "--out", &out]), 2);
    assert_eq!(code(&["query", "--in", &data, "--queries", &q, "--method", "fclsh", "--r", "99", "--out", &out]), 2);
    assert_eq!(code(&["query", "--bogus"]), 2);
    assert_eq!(code(&["gen", "--n", "5", "-d", "8", "--queries", "3", "--planted", "1:2", "--out", &out, "--query-out", &q]), 2);
    // data: malformed dataset
    std::fs::write(d.join("bad.txt"), "0101\n01\n").unwrap();
    assert_eq!(code(&["oracle", "--in", &p(d, "bad.txt"), "--queries", &q, "--r", "1", "--out", &out]), 3);
    // resource: the Hamming ball or the posting budget is too large
    assert_eq!(code(&["query", "--in", &data, "--queries", &q, "--method", "mih", "--parts", "1", "--r", "12", "--out", &out]), 4);
    assert_eq!(code(&["build", "--in", &data, "--method", "fclsh", "--r", "20", "--plan", "identity"]), 4);
}
