//! Line-oriented graph files.
//!
//! ```text
//! v <n>
//! e <tail> <head> <conductance> [<c_reverse>]
//! phi <tail> <head> <re> <im>
//! phi2 <tail> <head> <a_re> <a_im> <b_re> <b_im> <c_re> <c_im> <d_re> <d_im>
//! S <v1> <v2> ...
//! # comment
//! ```
//!
//! A `phi` line attaches to the first edge joining its endpoints that has no
//! transport yet; giving the endpoints in reverse stores the inverse.

use std::fmt::Write;

use super::Graph;
use crate::connection::{Connection, LineConnection, Sl2Connection};
use crate::error::{Error, Result};
use crate::linalg::{Mat2, C64};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, PartialEq)]
pub struct GraphFile {
    pub graph: Graph,
    /// Present when the file has any `phi`/`phi2` line.
    pub connection: Option<Connection>,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn num<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("cannot read {what} from `{tok}`")))
}

pub fn parse_graph_file(text: &str) -> Result<GraphFile> {
    let mut graph: Option<Graph> = None;
    let mut line_phi: Vec<(usize, usize, usize, C64)> = Vec::new();
    let mut sl2_phi: Vec<(usize, usize, usize, Mat2)> = Vec::new();
    let mut boundary: Option<(usize, Vec<usize>)> = None;

    for (idx, raw) in text.lines().enumerate() {
        let ln = idx + 1;
        let content = raw.split('#').next().unwrap().trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        let need = |k: usize| -> Result<()> {
            if toks.len() == k {
                Ok(())
            } else {
                Err(parse_err(
                    ln,
                    format!(
                        "`{}` expects {} fields, found {}",
                        toks[0],
                        k - 1,
                        toks.len() - 1
                    ),
                ))
            }
        };
        match toks[0] {
            "v" => {
                need(2)?;
                if graph.is_some() {
                    return Err(parse_err(ln, "duplicate `v` header"));
                }
                graph = Some(Graph::new(num(toks[1], ln, "vertex count")?));
            }
            "e" => {
                let g = graph
                    .as_mut()
                    .ok_or_else(|| parse_err(ln, "`e` before `v` header"))?;
                if toks.len() != 4 && toks.len() != 5 {
                    return Err(parse_err(
                        ln,
                        "`e` expects tail, head, conductance and an optional reverse weight",
                    ));
                }
                let a: usize = num(toks[1], ln, "tail")?;
                let b: usize = num(toks[2], ln, "head")?;
                let c: f64 = num(toks[3], ln, "conductance")?;
                let res = if toks.len() == 5 {
                    g.add_weighted_edge(a, b, c, num(toks[4], ln, "reverse conductance")?)
                } else {
                    g.add_edge(a, b, c)
                };
                res.map_err(|e| parse_err(ln, e.to_string()))?;
            }
            "phi" => {
                need(5)?;
                let z = C64::new(
                    num(toks[3], ln, "real part")?,
                    num(toks[4], ln, "imaginary part")?,
                );
                line_phi.push((ln, num(toks[1], ln, "tail")?, num(toks[2], ln, "head")?, z));
            }
            "phi2" => {
                need(11)?;
                let mut v = [C64::new(0.0, 0.0); 4];
                for (k, slot) in v.iter_mut().enumerate() {
                    *slot = C64::new(
                        num(toks[3 + 2 * k], ln, "entry")?,
                        num(toks[4 + 2 * k], ln, "entry")?,
                    );
                }
                let m = Mat2::new(v[0], v[1], v[2], v[3]);
                sl2_phi.push((ln, num(toks[1], ln, "tail")?, num(toks[2], ln, "head")?, m));
            }
            "S" => {
                if boundary.is_some() {
                    return Err(parse_err(ln, "duplicate `S` line"));
                }
                let vs = toks[1..]
                    .iter()
                    .map(|t| num(t, ln, "boundary vertex"))
                    .collect::<Result<Vec<usize>>>()?;
                boundary = Some((ln, vs));
            }
            other => return Err(parse_err(ln, format!("unknown record `{other}`"))),
        }
    }

    let mut graph = graph.ok_or_else(|| parse_err(0, "missing `v` header"))?;
    if let Some((ln, vs)) = boundary {
        graph
            .set_boundary(vs)
            .map_err(|e| parse_err(ln, e.to_string()))?;
    }
    if !line_phi.is_empty() && !sl2_phi.is_empty() {
        let ln = line_phi[0].0.max(sl2_phi[0].0);
        return Err(parse_err(ln, "cannot mix `phi` and `phi2` lines"));
    }

    let mut taken = vec![false; graph.m()];
    let mut locate = |ln: usize, a: usize, b: usize| -> Result<(usize, bool)> {
        let (lo, hi) = (a.min(b), a.max(b));
        let e = (0..graph.m())
            .find(|&e| !taken[e] && graph.edge(e).tail == lo && graph.edge(e).head == hi)
            .ok_or_else(|| parse_err(ln, format!("no unassigned edge {a}-{b} for transport")))?;
        taken[e] = true;
        Ok((e, a == lo))
    };

    let connection = if !line_phi.is_empty() {
        let mut conn = LineConnection::trivial(graph.m());
        for (ln, a, b, z) in line_phi {
            if z.norm() == 0.0 {
                return Err(parse_err(ln, "transport must be nonzero"));
            }
            let (e, fwd) = locate(ln, a, b)?;
            conn.set(e, if fwd { z } else { z.inv() });
        }
        Some(Connection::Line(conn))
    } else if !sl2_phi.is_empty() {
        let mut mats = vec![Mat2::IDENTITY; graph.m()];
        let tol = Tolerances::DEFAULT;
        for (ln, a, b, m) in sl2_phi {
            if (m.det() - 1.0).norm() > tol.sl2_det {
                return Err(parse_err(
                    ln,
                    format!("transport has determinant {}", m.det()),
                ));
            }
            let (e, fwd) = locate(ln, a, b)?;
            mats[e] = if fwd { m } else { m.adj() };
        }
        Some(Connection::Sl2(Sl2Connection::new(mats, &tol)?))
    } else {
        None
    };
    Ok(GraphFile { graph, connection })
}

/// Writes a graph (and optional connection) in the file format above.
pub fn write_graph_file(g: &Graph, conn: Option<&Connection>) -> String {
    let mut out = String::new();
    writeln!(out, "v {}", g.n()).unwrap();
    for e in g.edges() {
        match e.reverse {
            Some(r) => {
                writeln!(out, "e {} {} {:?} {:?}", e.tail, e.head, e.conductance, r).unwrap()
            }
            None => writeln!(out, "e {} {} {:?}", e.tail, e.head, e.conductance).unwrap(),
        }
    }
    match conn {
        Some(Connection::Line(c)) => {
            for (e, z) in g.edges().iter().zip(c.values()) {
                writeln!(out, "phi {} {} {:?} {:?}", e.tail, e.head, z.re, z.im).unwrap();
            }
        }
        Some(Connection::Sl2(c)) => {
            for (e, m) in g.edges().iter().zip(c.values()) {
                write!(out, "phi2 {} {}", e.tail, e.head).unwrap();
                for z in [m.a, m.b, m.c, m.d] {
                    write!(out, " {:?} {:?}", z.re, z.im).unwrap();
                }
                out.push('\n');
            }
        }
        None => {}
    }
    if !g.boundary().is_empty() {
        out.push('S');
        for v in g.boundary() {
            write!(out, " {v}").unwrap();
        }
        out.push('\n');
    }
    out
}
