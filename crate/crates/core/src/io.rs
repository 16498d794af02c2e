//! Plain-text graph format.
//!
//! ```text
//! # comment
//! p <n> <m>
//! e <u> <v> <w>
//! ```
//!
//! Vertex ids are 0-based and weights are decimal. Exactly `m` edge lines
//! must follow the problem line.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{Edge, WeightedGraph};

pub fn parse_graph(text: &str) -> Result<WeightedGraph> {
    let mut header: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: &str| Error::Parse {
            line: line_no,
            msg: msg.to_string(),
        };
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("p") => {
                if header.is_some() {
                    return Err(err("duplicate problem line"));
                }
                let n = parse_num::<usize>(tok.next(), line_no, "vertex count")?;
                let m = parse_num::<usize>(tok.next(), line_no, "edge count")?;
                if tok.next().is_some() {
                    return Err(err("trailing tokens"));
                }
                header = Some((n, m));
                edges.reserve(m);
            }
            Some("e") => {
                let Some((n, _)) = header else {
                    return Err(err("edge before problem line"));
                };
                let u = parse_num::<usize>(tok.next(), line_no, "endpoint")?;
                let v = parse_num::<usize>(tok.next(), line_no, "endpoint")?;
                let w = parse_num::<f64>(tok.next(), line_no, "weight")?;
                if tok.next().is_some() {
                    return Err(err("trailing tokens"));
                }
                if u >= n || v >= n {
                    return Err(err("vertex id out of range"));
                }
                if !w.is_finite() || w < 0.0 {
                    return Err(err("weight must be finite and non-negative"));
                }
                edges.push(Edge::new(u, v, w));
            }
            Some(other) => return Err(err(&format!("unknown line type {other:?}"))),
            None => unreachable!(),
        }
    }
    let (n, m) = header.ok_or(Error::Parse {
        line: 0,
        msg: "missing problem line".into(),
    })?;
    if edges.len() != m {
        return Err(Error::Parse {
            line: 0,
            msg: format!("expected {m} edges, found {}", edges.len()),
        });
    }
    WeightedGraph::new(n, edges)
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    tok.and_then(|t| t.parse().ok()).ok_or_else(|| Error::Parse {
        line,
        msg: format!("missing or malformed {what}"),
    })
}

pub fn read_graph(path: impl AsRef<Path>) -> std::io::Result<std::result::Result<WeightedGraph, Error>> {
    std::fs::read_to_string(path).map(|s| parse_graph(&s))
}

pub fn write_graph(g: &WeightedGraph) -> String {
    let mut out = String::with_capacity(16 * g.m() + 16);
    let _ = writeln!(out, "p {} {}", g.n(), g.m());
    for e in g.edges() {
        let _ = writeln!(out, "e {} {} {}", e.u, e.v, e.w);
    }
    out
}
