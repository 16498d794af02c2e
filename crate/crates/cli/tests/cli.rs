use std::collections::BTreeSet;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn treepack(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treepack"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn graph_text(n: usize, edges: &[(usize, usize, f64)]) -> String {
    let mut s = format!("# test graph\np {} {}\n", n, edges.len());
    for (u, v, w) in edges {
        s.push_str(&format!("e {u} {v} {w}\n"));
    }
    s
}

fn complete(n: usize) -> Vec<(usize, usize, f64)> {
    let mut e = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            e.push((u, v, 1.0));
        }
    }
    e
}

/// Small deterministic pseudo-random connected graph.
fn scrambled(n: usize, seed: u64) -> Vec<(usize, usize, f64)> {
    let mut x = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next = move |k: u64| {
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        x % k
    };
    let mut e: Vec<_> = (1..n)
        .map(|v| (v, next(v as u64) as usize, 1.0 + next(4) as f64))
        .collect();
    for _ in 0..n {
        let (u, v) = (next(n as u64) as usize, next(n as u64) as usize);
        if u != v {
            e.push((u, v, 0.5 * (1 + next(6)) as f64));
        }
    }
    e
}

fn brute_force(n: usize, edges: &[(usize, usize, f64)]) -> f64 {
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << (n - 1)) {
        let inside = |v: usize| v > 0 && mask >> (v - 1) & 1 == 1;
        let c: f64 = edges
            .iter()
            .filter(|(u, v, _)| inside(*u) != inside(*v))
            .map(|e| e.2)
            .sum();
        best = best.min(c);
    }
    best
}

#[test]
fn bound_matches_formula() {
    // q_k = Σ_{r ≤ k} (k + 1 − r)·C(n, r) / (k + 1 − 2α)
    let v = stdout_json(&treepack(&["bound", "--n", "10", "--alpha", "1"]));
    assert_eq!(v["k"], 2);
    assert_eq!(v["q_k"].as_f64().unwrap(), (2.0 * 10.0 + 45.0) / 1.0);
    let v = stdout_json(&treepack(&["bound", "--n", "10", "--alpha", "1.5"]));
    assert_eq!(v["k"], 3);
    assert_eq!(v["q_k"].as_f64().unwrap(), 3.0 * 10.0 + 2.0 * 45.0 + 120.0);
}

#[test]
fn triangle_min_cut() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "tri.graph", &graph_text(3, &[(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)]));
    let v = stdout_json(&treepack(&["mincut", &f, "--seed", "1"]));
    assert_eq!(v["value"].as_f64(), Some(2.0));
    assert_eq!(v["side"].as_str().map(str::len), Some(3));
}

#[test]
fn modes_and_solvers_agree_with_brute_force() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..6 {
        let n = 8 + seed as usize;
        let edges = scrambled(n, seed);
        let want = brute_force(n, &edges);
        let f = write(dir.path(), &format!("g{seed}.graph"), &graph_text(n, &edges));
        for mode in ["high-probability", "refined", "exact-oracle"] {
            for solver in ["dense", "sparse", "both"] {
                let v = stdout_json(&treepack(&[
                    "mincut", &f, "--mode", mode, "--solver", solver, "--seed", "3",
                ]));
                let got = v["value"].as_f64().unwrap();
                assert!((got - want).abs() < 1e-9, "{mode}/{solver} seed {seed}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn enumerate_k4() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "k4.graph", &graph_text(4, &complete(4)));
    let from_trees = stdout_json(&treepack(&["enumerate", &f, "--alpha", "1.3333334"]));
    let exhaustive = stdout_json(&treepack(&["enumerate", &f, "--alpha", "1.3333334", "--exhaustive"]));
    let sides = |v: &Value| -> BTreeSet<String> {
        v.as_array()
            .unwrap()
            .iter()
            .map(|c| c["side"].as_str().unwrap().to_owned())
            .collect()
    };
    // 4 singletons of value 3, 3 pair splits of value 4
    assert_eq!(sides(&exhaustive).len(), 7);
    assert_eq!(sides(&from_trees), sides(&exhaustive));
    for c in from_trees.as_array().unwrap() {
        let edges = c["tree_edges"].as_array().unwrap().len();
        assert!((1..=2).contains(&edges));
        assert!(c["tree_id"].is_u64());
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.graph", "p 3 1\ne 0 7 1\n");
    let out = treepack(&["mincut", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(!out.stderr.is_empty());

    let missing = dir.path().join("missing.graph");
    assert_eq!(treepack(&["mincut", missing.to_str().unwrap()]).status.code(), Some(2));

    let split = write(dir.path(), "split.graph", &graph_text(4, &[(0, 1, 1.0), (2, 3, 1.0)]));
    assert_eq!(treepack(&["mincut", &split]).status.code(), Some(2));

    let tri = write(dir.path(), "tri.graph", &graph_text(3, &complete(3)));
    assert_eq!(treepack(&["mincut", &tri, "--mode", "nope"]).status.code(), Some(1));
    assert_eq!(treepack(&["mincut"]).status.code(), Some(1));
    assert_eq!(treepack(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(treepack(&["enumerate", &tri, "--alpha", "0.5"]).status.code(), Some(2));
    assert_eq!(treepack(&["--help"]).status.code(), Some(0));
}

#[test]
fn thread_cap_does_not_change_result() {
    let dir = tempfile::tempdir().unwrap();
    let edges = scrambled(14, 9);
    let f = write(dir.path(), "g.graph", &graph_text(14, &edges));
    let run = |threads: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_treepack"));
        cmd.args(["mincut", &f, "--seed", "5"]);
        if let Some(t) = threads {
            cmd.env("MINCUT_THREADS", t);
        }
        let mut v = stdout_json(&cmd.output().unwrap());
        v.as_object_mut().unwrap().remove("timings");
        v
    };
    assert_eq!(run(Some("1")), run(None));
    assert_eq!(run(Some("3")), run(None));
}

#[test]
fn bench_directory() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "a.graph", &graph_text(10, &scrambled(10, 1)));
    write(dir.path(), "b.graph", &graph_text(40, &scrambled(40, 2)));
    write(dir.path(), "notes.txt", "not a graph\n");
    let out = treepack(&["bench", dir.path().to_str().unwrap(), "--repeat", "2"]);
    let v = stdout_json(&out);
    let graphs = v["graphs"].as_array().unwrap();
    assert_eq!(graphs.len(), 2);
    assert_eq!(graphs[0]["runs_ms"].as_array().unwrap().len(), 2);
    assert!(v["fit_exponent"].is_f64());
    assert!(String::from_utf8_lossy(&out.stderr).contains("skipping"));

    let empty = tempfile::tempdir().unwrap();
    assert_eq!(
        treepack(&["bench", empty.path().to_str().unwrap()]).status.code(),
        Some(2)
    );
}
