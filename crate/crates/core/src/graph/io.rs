//! Line-oriented edge-list format.
//!
//! ```text
//! # comment
//! e <x> <y> <w>     edge of weight w > 0
//! m <x> <value>     measure (default 1)
//! c <x> <value>     potential (default 0)
//! ```

use std::fmt::Write as _;

use super::{FiniteGraph, FiniteGraphBuilder, Graph, Window};
use crate::error::{Error, Result};

pub fn parse_edge_list(text: &str) -> Result<FiniteGraph> {
    let mut b = FiniteGraphBuilder::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        let number = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::Parse { line, message: format!("not a number: {s:?}") })
        };
        let arity = |n: usize| {
            if fields.len() == n {
                Ok(())
            } else {
                Err(Error::Parse { line, message: format!("expected {} fields, found {}", n, fields.len()) })
            }
        };
        match fields[0] {
            "e" => {
                arity(4)?;
                b.edge(fields[1], fields[2], number(fields[3])?)?;
            }
            "m" => {
                arity(3)?;
                b.measure(fields[1], number(fields[2])?)?;
            }
            "c" => {
                arity(3)?;
                b.potential(fields[1], number(fields[2])?)?;
            }
            other => {
                return Err(Error::Parse { line, message: format!("unknown record type {other:?}") })
            }
        }
    }
    Ok(b.build())
}

/// Writes the subgraph induced by `window`. Every vertex gets an `m` line so
/// isolated vertices survive; `c` lines are written only for `c > 0`.
/// Edges leaving the window are dropped.
pub fn serialize<G: Graph>(g: &G, window: &Window<G::Vertex>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {} vertices", window.len());
    for (i, x) in window.iter().enumerate() {
        for (y, w) in g.neighbors(x) {
            if let Some(j) = window.index_of(&y) {
                if i < j {
                    let _ = writeln!(out, "e {} {} {}", g.encode(x), g.encode(&y), w);
                }
            }
        }
    }
    for x in window.iter() {
        let _ = writeln!(out, "m {} {}", g.encode(x), g.measure(x));
        let c = g.potential(x);
        if c > 0.0 {
            let _ = writeln!(out, "c {} {}", g.encode(x), c);
        }
    }
    out
}
