use std::fmt::Write as _;
use std::path::Path;

use super::{Network, NodeId};
use crate::error::{Error, Result};

/// `# nodes=<N>` header followed by one `u v` line per edge (`u < v`).
pub fn write_network(net: &Network) -> String {
    let mut out = String::with_capacity(16 + net.edge_count() * 12);
    let _ = writeln!(out, "# nodes={}", net.node_count());
    for &(u, v) in net.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

pub fn parse_network(text: &str) -> Result<Network> {
    let parse_err = |line: usize, message: String| Error::Parse { line, message };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "missing `# nodes=` header".into()))?;
    let node_count: usize = header
        .strip_prefix("# nodes=")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| parse_err(1, format!("bad header `{header}`")))?;
    let mut edges = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let mut next = || -> Result<NodeId> {
            parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err(i + 1, format!("expected `u v`, got `{line}`")))
        };
        let (u, v) = (next()?, next()?);
        if parts.next().is_some() {
            return Err(parse_err(i + 1, format!("trailing tokens in `{line}`")));
        }
        edges.push((u, v));
    }
    Network::from_edges(node_count, edges)
}

pub fn read_network(path: &Path) -> Result<Network> {
    parse_network(&std::fs::read_to_string(path)?)
}
