//! Graph sources: preset specs and graph files.

use std::str::FromStr;

use crsf::graph::{self, parse_graph_file, Preset};
use crsf::{Connection, Error, Graph, Result, C64};

/// A loaded graph with whatever surface data and connection came with it.
#[derive(Debug, Clone)]
pub struct Input {
    pub label: String,
    pub graph: Graph,
    pub preset: Option<Preset>,
    pub connection: Option<Connection>,
}

fn dims(spec: &str, arg: &str) -> Result<(usize, usize)> {
    let (a, b) = arg
        .split_once('x')
        .ok_or_else(|| Error::Invalid(format!("preset `{spec}` needs dimensions AxB")))?;
    Ok((count(spec, a)?, count(spec, b)?))
}

fn count(spec: &str, s: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::Invalid(format!("preset `{spec}`: cannot read `{s}` as a size")))
}

/// `cycle:N`, `path:N`, `cylinder:MxN`, `torus:MxN`, `grid:RxC`, `chain:K`.
pub fn preset(spec: &str) -> Result<Input> {
    let (kind, arg) = spec
        .split_once(':')
        .ok_or_else(|| Error::Invalid(format!("preset `{spec}` has no `:`")))?;
    let with = |p: Preset| Input {
        label: spec.into(),
        graph: p.graph.clone(),
        preset: Some(p),
        connection: None,
    };
    let plain = |g: Graph| Input {
        label: spec.into(),
        graph: g,
        preset: None,
        connection: None,
    };
    Ok(match kind {
        "cycle" => with(graph::cycle(count(spec, arg)?)?),
        "chain" => with(graph::chain_of_loops(count(spec, arg)?)?),
        "path" => plain(graph::path(count(spec, arg)?)?),
        "cylinder" => {
            let (m, n) = dims(spec, arg)?;
            with(graph::cylinder(m, n)?)
        }
        "torus" => {
            let (m, n) = dims(spec, arg)?;
            with(graph::torus(m, n)?)
        }
        "grid" => {
            let (r, c) = dims(spec, arg)?;
            plain(graph::grid(r, c)?)
        }
        _ => return Err(Error::Invalid(format!("unknown preset kind `{kind}`"))),
    })
}

pub fn file(path: &std::path::Path) -> Result<Input> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))?;
    let parsed = parse_graph_file(&text)?;
    Ok(Input {
        label: path.display().to_string(),
        graph: parsed.graph,
        preset: None,
        connection: parsed.connection,
    })
}

pub fn load(preset_spec: Option<&str>, path: Option<&std::path::Path>) -> Result<Input> {
    match (preset_spec, path) {
        (Some(s), None) => preset(s),
        (None, Some(p)) => file(p),
        _ => Err(Error::Invalid(
            "give exactly one of --preset and --file".into(),
        )),
    }
}

/// Complex number as `a`, `a+bi`, `bi` or `a-bi`.
pub fn complex(s: &str) -> std::result::Result<C64, String> {
    C64::from_str(s.trim()).map_err(|_| format!("cannot read `{s}` as a complex number"))
}

fn list<T: FromStr>(s: &str, len: usize) -> std::result::Result<Vec<T>, String> {
    let v: Vec<T> = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| format!("cannot read `{t}` in `{s}`"))
        })
        .collect::<std::result::Result<_, _>>()?;
    if v.len() != len {
        return Err(format!("expected {len} comma-separated values, got `{s}`"));
    }
    Ok(v)
}

/// `x,y`.
pub fn point(s: &str) -> std::result::Result<(f64, f64), String> {
    let v = list::<f64>(s, 2)?;
    Ok((v[0], v[1]))
}

/// `j,k,m` with `m ≥ 1`.
pub fn class(s: &str) -> std::result::Result<(i64, i64, usize), String> {
    let v = list::<i64>(s, 3)?;
    if v[2] < 1 {
        return Err(format!("multiplicity must be at least 1 in `{s}`"));
    }
    Ok((v[0], v[1], v[2] as usize))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse() {
        assert_eq!(preset("cycle:5").unwrap().graph.n(), 5);
        assert_eq!(preset("cylinder:3x4").unwrap().graph.m(), 3 * 4 + 2 * 4);
        assert_eq!(preset("grid:2x3").unwrap().graph.m(), 7);
        assert!(preset("ladder:3").is_err());
        assert!(preset("cylinder:3").is_err());
    }

    #[test]
    fn complex_forms() {
        assert_eq!(complex("0.3+0.9539i").unwrap(), C64::new(0.3, 0.9539));
        assert_eq!(complex("-1").unwrap(), C64::new(-1.0, 0.0));
        assert!(complex("abc").is_err());
    }

    #[test]
    fn tuples() {
        assert_eq!(point("0.5, 1.5").unwrap(), (0.5, 1.5));
        assert_eq!(class("1,0,1").unwrap(), (1, 0, 1));
        assert!(class("1,0,0").is_err());
        assert!(point("1").is_err());
    }
}
