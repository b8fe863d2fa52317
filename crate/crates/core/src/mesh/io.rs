//! Line-oriented text format for meshes.
//!
//! ```text
//! mesh v1
//! label grid-5x5
//! dim 2
//! node 0 boundary 1 0 0
//! edge 0 1 1 1
//! ```
//!
//! `node <id> <interior|boundary> <volume> <coords...>` and
//! `edge <a> <b> <weight> <length>`. Node ids must be `0..N` in order. Blank
//! lines and lines starting with `#` are ignored.

use std::fmt::Write as _;

use super::{Edge, Mesh, NodeRole};
use crate::error::{Error, Result};

const HEADER: &str = "mesh v1";

pub fn write_mesh(mesh: &Mesh) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{HEADER}");
    let _ = writeln!(out, "label {}", mesh.label());
    let _ = writeln!(out, "dim {}", mesh.dim());
    for v in 0..mesh.node_count() {
        let role = match mesh.role(v) {
            NodeRole::Interior => "interior",
            NodeRole::Boundary => "boundary",
        };
        let _ = write!(out, "node {v} {role} {}", mesh.volume(v));
        for x in mesh.position(v) {
            let _ = write!(out, " {x}");
        }
        out.push('\n');
    }
    for e in mesh.edges() {
        let _ = writeln!(out, "edge {} {} {} {}", e.a, e.b, e.weight, e.length);
    }
    out
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| parse_err(line, format!("bad {what} `{tok}`")))
}

pub fn read_mesh(text: &str) -> Result<Mesh> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    match lines.next() {
        Some((_, l)) if l == HEADER => {}
        Some((n, l)) => return Err(parse_err(n, format!("expected `{HEADER}`, found `{l}`"))),
        None => return Err(parse_err(0, "empty input")),
    }
    let mut label = String::new();
    let mut dim: Option<usize> = None;
    let mut positions = Vec::new();
    let mut volumes = Vec::new();
    let mut roles = Vec::new();
    let mut edges = Vec::new();
    for (n, line) in lines {
        let (key, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let mut toks = rest.split_whitespace();
        match key {
            "label" => label = rest.trim().to_string(),
            "dim" => dim = Some(num(toks.next(), n, "dimension")?),
            "node" => {
                let d = dim.ok_or_else(|| parse_err(n, "`dim` must precede nodes"))?;
                let id: usize = num(toks.next(), n, "node id")?;
                if id != positions.len() {
                    return Err(parse_err(n, format!("node id {id} out of order")));
                }
                let role = match toks.next() {
                    Some("interior") => NodeRole::Interior,
                    Some("boundary") => NodeRole::Boundary,
                    other => return Err(parse_err(n, format!("bad role {other:?}"))),
                };
                let vol: f64 = num(toks.next(), n, "volume")?;
                let coords = (0..d)
                    .map(|_| num::<f64>(toks.next(), n, "coordinate"))
                    .collect::<Result<Vec<_>>>()?;
                if toks.next().is_some() {
                    return Err(parse_err(n, "trailing tokens"));
                }
                positions.push(coords);
                volumes.push(vol);
                roles.push(role);
            }
            "edge" => {
                let a = num(toks.next(), n, "edge endpoint")?;
                let b = num(toks.next(), n, "edge endpoint")?;
                let weight = num(toks.next(), n, "weight")?;
                let length = num(toks.next(), n, "length")?;
                if toks.next().is_some() {
                    return Err(parse_err(n, "trailing tokens"));
                }
                edges.push(Edge { a, b, weight, length });
            }
            other => return Err(parse_err(n, format!("unknown record `{other}`"))),
        }
    }
    let dim = dim.ok_or_else(|| parse_err(0, "missing `dim`"))?;
    Mesh::new(label, dim, positions, volumes, roles, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_grid_mesh;
    use proptest::prelude::*;

    #[test]
    fn rejects_unknown_record() {
        let err = read_mesh("mesh v1\ndim 1\nfoo 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
    }

    proptest! {
        #[test]
        fn round_trip(nx in 3usize..6, ny in 3usize..6, h in 0.1f64..3.0, a in 0.0f64..0.9) {
            let m = build_grid_mesh(nx, ny, h, |x| 1.0 + a * (x[0] * 1.3).sin()).unwrap();
            let back = read_mesh(&write_mesh(&m)).unwrap();
            prop_assert_eq!(write_mesh(&back), write_mesh(&m));
            prop_assert_eq!(back.edges(), m.edges());
            prop_assert_eq!(back.volumes(), m.volumes());
        }
    }
}
