use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gpm_bench::report::Report;
use tempfile::TempDir;

fn gpm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gpm")).args(args).output().expect("spawn gpm")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn first_line(o: &Output) -> String {
    assert!(o.status.success(), "gpm failed: {}", String::from_utf8_lossy(&o.stderr));
    stdout(o).lines().next().unwrap_or_default().to_string()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn triangles_on_k4() {
    let dir = TempDir::new().unwrap();
    let k4 = write(&dir, "k4.txt", "0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n");
    let o = gpm(&["run", "--app", "tc", "--graph", s(&k4), "--workers", "2"]);
    assert_eq!(first_line(&o), "triangle: 4");
    assert!(stdout(&o).contains("worker 1:"));
}

#[test]
fn three_motifs_on_five_leaf_star() {
    let dir = TempDir::new().unwrap();
    let star = write(&dir, "star5.txt", "0 1\n0 2\n0 3\n0 4\n0 5\n");
    assert_eq!(first_line(&gpm(&["run", "--app", "3mc", "--graph", s(&star)])), "triangle: 0, wedge: 10");
}

#[test]
fn optimization_flags_keep_counts() {
    let dir = TempDir::new().unwrap();
    let g = dir.path().join("g.txt");
    assert!(gpm(&["gen", "er:48:0.3", "--out", s(&g)]).status.success());
    let base = first_line(&gpm(&["run", "--app", "kcc:4", "--graph", s(&g), "--workers", "4"]));
    assert!(base.starts_with("4-clique: "));
    for extra in [&["--no-cache", "--no-dedup"][..], &["--no-vreuse", "--no-creuse", "--chunk-bytes", "2K"], &["--orient"]] {
        let mut args = vec!["run", "--app", "kcc:4", "--graph", s(&g), "--workers", "4"];
        args.extend_from_slice(extra);
        assert_eq!(first_line(&gpm(&args)), base, "{extra:?}");
    }
    let oracle = first_line(&gpm(&["oracle", "--app", "kcc:4", "--graph", s(&g)]));
    assert_eq!(oracle, base);
}

#[test]
fn generated_graph_source() {
    let o = gpm(&["run", "--app", "kcc:5", "--graph", "gen:complete:8", "--workers", "3"]);
    assert_eq!(first_line(&o), "5-clique: 56");
}

#[test]
fn report_file_parses() {
    let dir = TempDir::new().unwrap();
    let report = dir.path().join("r.txt");
    let o = gpm(&["run", "--app", "4mc", "--graph", "gen:er:32:0.3", "--workers", "2", "--report", s(&report), "--report-fetches"]);
    assert!(o.status.success());
    let r: Report = std::fs::read_to_string(&report).unwrap().parse().unwrap();
    assert_eq!(r.workers(), vec![0, 1]);
    assert_eq!(r.globals().len(), 6);
    for i in 0..2 {
        let created = r.worker_u64(i, "embeddings_created").unwrap();
        assert_eq!(r.worker_u64(i, "terminated_transitions"), Some(created));
        assert!(r.worker(i, "wall_time.explore").is_some());
        let fetched: u64 = r.fetches(i).values().sum();
        assert_eq!(r.worker_u64(i, "fetch_count"), Some(fetched));
    }
    let line = first_line(&o);
    for (p, c) in r.globals() {
        assert!(line.contains(&format!("{p}: {c}")), "{line}");
    }
}

#[test]
fn labeled_triangles_match_oracle() {
    let dir = TempDir::new().unwrap();
    let g = dir.path().join("g.txt");
    assert!(gpm(&["gen", "er:30:0.4", "--seed", "3", "--out", s(&g)]).status.success());
    let labels: String = (0..30).map(|v| format!("{v} {}\n", v % 3)).collect();
    let l = write(&dir, "labels.txt", &labels);
    for pl in ["0,0,1", "2,1,0", "1,1,1"] {
        let common = ["--app", "tc", "--graph", s(&g), "--labels", s(&l), "--pattern-labels", pl];
        let mut run = vec!["run", "--workers", "3"];
        run.extend_from_slice(&common);
        let mut oracle = vec!["oracle"];
        oracle.extend_from_slice(&common);
        assert_eq!(first_line(&gpm(&run)), first_line(&gpm(&oracle)), "{pl}");
    }
}

#[test]
fn gen_writes_edge_lists() {
    let o = gpm(&["gen", "complete:4"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 6);
    assert_eq!(stdout(&gpm(&["gen", "er:64:0.3", "--seed", "7"])), stdout(&gpm(&["gen", "er:64:0.3", "--seed", "7"])));
}

#[test]
fn usage_errors_exit_2() {
    let cases: &[&[&str]] = &[
        &["run", "--app", "5mc", "--graph", "gen:complete:4"],
        &["run", "--app", "tc", "--graph", "gen:complete:4", "--bogus"],
        &["run", "--app", "3mc", "--graph", "gen:complete:4", "--orient"],
        &["run", "--app", "tc", "--graph", "gen:complete:4", "--mode", "socket"],
        &["run", "--app", "tc", "--graph", "gen:complete:4", "--partition", "0"],
        &["run", "--app", "tc", "--graph", "gen:complete:4", "--workers", "0"],
        &["run", "--app", "tc", "--graph", "gen:complete:4", "--chunk-bytes", "lots"],
        &["run", "--app", "tc", "--graph", "gen:complete:4", "--pattern-labels", "0,0,0"],
        &["gen", "hypercube:3"],
        &["run", "--graph", "gen:complete:4"],
    ];
    for args in cases {
        assert_eq!(gpm(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn runtime_errors_exit_1() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.txt");
    let o = gpm(&["run", "--app", "tc", "--graph", s(&missing)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.txt"));
    let bad = write(&dir, "bad.txt", "0 1\nzero one\n");
    assert_eq!(gpm(&["run", "--app", "tc", "--graph", s(&bad)]).status.code(), Some(1));
    // 8 bytes cannot hold one embedding
    assert_eq!(gpm(&["run", "--app", "tc", "--graph", "gen:complete:5", "--chunk-bytes", "8"]).status.code(), Some(1));
    assert_eq!(gpm(&["oracle", "--app", "kcc:5", "--graph", "gen:path:5000"]).status.code(), Some(1));
}
