//! Plain-text ingestion of edge lists and node-attribute files.
//!
//! Edge lists hold one `src dst weight` triple per line (0-indexed, directed
//! from `src` to `dst`). Node-attribute files hold `node delta [h]` lines,
//! with `h` defaulting to 0. Blank lines and `#` comments are ignored.

use std::fs;
use std::path::Path;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::graph::{AbsorptionConfig, WeightedDigraph};

fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let body = line.split('#').next().unwrap_or("");
        let fields: Vec<&str> = body.split_whitespace().collect();
        (!fields.is_empty()).then_some((i + 1, fields))
    })
}

fn parse_field<T: std::str::FromStr>(line: usize, field: &str, what: &str) -> Result<T> {
    field.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("cannot parse {what} from {field:?}"),
    })
}

/// Parses an edge list. The node count is one more than the largest index
/// seen unless `n` is given.
pub fn parse_edge_list(text: &str, n: Option<usize>) -> Result<WeightedDigraph> {
    let mut edges = Vec::new();
    let mut max_node = 0usize;
    for (line, fields) in content_lines(text) {
        if fields.len() != 3 {
            return Err(Error::Parse {
                line,
                msg: format!("expected `src dst weight`, found {} fields", fields.len()),
            });
        }
        let src: usize = parse_field(line, fields[0], "source node")?;
        let dst: usize = parse_field(line, fields[1], "target node")?;
        let w: f64 = parse_field(line, fields[2], "weight")?;
        if src == dst {
            return Err(Error::Parse {
                line,
                msg: format!("self-edge on node {src} is not allowed"),
            });
        }
        max_node = max_node.max(src).max(dst);
        edges.push((src, dst, w));
    }
    if edges.is_empty() {
        return Err(Error::InvalidGraph("edge list contains no edges".into()));
    }
    let n = n.unwrap_or(max_node + 1);
    WeightedDigraph::from_edges(n, &edges)
}

/// Parses node attributes for a graph with `n` nodes. Every node must be listed once.
pub fn parse_node_attributes(text: &str, n: usize) -> Result<AbsorptionConfig> {
    let mut delta = vec![f64::NAN; n];
    let mut h = vec![0.0; n];
    for (line, fields) in content_lines(text) {
        if !(2..=3).contains(&fields.len()) {
            return Err(Error::Parse {
                line,
                msg: "expected `node delta [h]`".into(),
            });
        }
        let node: usize = parse_field(line, fields[0], "node")?;
        if node >= n {
            return Err(Error::Parse {
                line,
                msg: format!("node {node} out of range for {n} nodes"),
            });
        }
        if !delta[node].is_nan() {
            return Err(Error::Parse {
                line,
                msg: format!("node {node} listed twice"),
            });
        }
        delta[node] = parse_field(line, fields[1], "delta")?;
        if let Some(f) = fields.get(2) {
            h[node] = parse_field(line, f, "h")?;
        }
    }
    if let Some(i) = delta.iter().position(|d| d.is_nan()) {
        return Err(Error::InvalidAbsorption(format!("no delta given for node {i}")));
    }
    AbsorptionConfig::new(DVector::from_vec(delta), DVector::from_vec(h))
}

pub fn read_edge_list(path: &Path) -> Result<WeightedDigraph> {
    parse_edge_list(&fs::read_to_string(path)?, None)
}

pub fn read_node_attributes(path: &Path, n: usize) -> Result<AbsorptionConfig> {
    parse_node_attributes(&fs::read_to_string(path)?, n)
}

pub fn write_edge_list(g: &WeightedDigraph) -> String {
    let mut out = String::from("# src dst weight\n");
    for j in 0..g.n() {
        for i in 0..g.n() {
            let w = g.weight(j, i);
            if w != 0.0 && i != j {
                out.push_str(&format!("{j} {i} {w}\n"));
            }
        }
    }
    out
}
