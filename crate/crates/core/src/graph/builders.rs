use super::{Digraph, DirEdge, Graph};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PresetKind {
    /// `G_m × Z_n`: a path of length `m` times an `n`-cycle.
    AnnulusProduct {
        m: usize,
        n: usize,
    },
    TorusGrid {
        m: usize,
        n: usize,
    },
    ChainOfLoops {
        k: usize,
    },
    General,
}

/// Traversals crossing a cut dual to a homology generator, each oriented in
/// the positive winding direction.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub name: &'static str,
    pub darts: Vec<DirEdge>,
}

/// A graph together with its surface data.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub kind: PresetKind,
    pub graph: Graph,
    pub generators: Vec<Generator>,
}

impl Preset {
    /// Maximal number of disjoint cycles winding around the first generator,
    /// where known from the construction.
    pub fn winding_capacity(&self) -> Option<usize> {
        match self.kind {
            PresetKind::AnnulusProduct { m, .. } => Some(m),
            PresetKind::ChainOfLoops { k } => Some(k),
            _ => None,
        }
    }
}

fn dart_between(g: &Graph, id: usize, from: usize) -> DirEdge {
    DirEdge::new(id, g.edge(id).tail == from)
}

/// The path `0 - 1 - … - (n-1)`.
pub fn path(n: usize) -> Result<Graph> {
    if n == 0 {
        return Err(Error::invalid("path needs at least one vertex"));
    }
    let mut g = Graph::new(n);
    for i in 0..n - 1 {
        g.add_edge(i, i + 1, 1.0)?;
    }
    Ok(g)
}

/// The `n`-cycle with its winding edge `n-1 → 0` as generator.
pub fn cycle(n: usize) -> Result<Preset> {
    let mut p = cylinder(1, n)?;
    p.kind = PresetKind::General;
    Ok(p)
}

/// `G_m × Z_n` with unit conductances. Vertex `(i, j)` has id `i·n + j`,
/// `i` indexing the path and `j` the cycle; the generator collects the ring
/// edges `(i, n-1) → (i, 0)`.
pub fn cylinder(m: usize, n: usize) -> Result<Preset> {
    if m == 0 {
        return Err(Error::invalid("cylinder width must be at least 1"));
    }
    if n < 3 {
        return Err(Error::invalid(format!(
            "cylinder circumference {n} < 3 gives a degenerate cycle"
        )));
    }
    let id = |i: usize, j: usize| i * n + j;
    let mut g = Graph::new(m * n);
    let mut darts = Vec::with_capacity(m);
    for i in 0..m {
        for j in 0..n {
            let e = g.add_edge(id(i, j), id(i, (j + 1) % n), 1.0)?;
            if j == n - 1 {
                darts.push(dart_between(&g, e, id(i, j)));
            }
        }
    }
    for i in 0..m.saturating_sub(1) {
        for j in 0..n {
            g.add_edge(id(i, j), id(i + 1, j), 1.0)?;
        }
    }
    Ok(Preset {
        kind: PresetKind::AnnulusProduct { m, n },
        graph: g,
        generators: vec![Generator {
            name: "winding",
            darts,
        }],
    })
}

/// `m × n` torus grid; vertex `(x, y)` has id `x + m·y`. Generators are the
/// east-wrap edges `(m-1, y) → (0, y)` and the north-wrap edges `(x, n-1) → (x, 0)`.
pub fn torus(m: usize, n: usize) -> Result<Preset> {
    if m < 3 || n < 3 {
        return Err(Error::invalid(format!(
            "undirected torus needs m, n >= 3, got {m}x{n}"
        )));
    }
    let id = |x: usize, y: usize| x + m * y;
    let mut g = Graph::new(m * n);
    let (mut east, mut north) = (Vec::new(), Vec::new());
    for y in 0..n {
        for x in 0..m {
            let e = g.add_edge(id(x, y), id((x + 1) % m, y), 1.0)?;
            if x == m - 1 {
                east.push(dart_between(&g, e, id(x, y)));
            }
            let e = g.add_edge(id(x, y), id(x, (y + 1) % n), 1.0)?;
            if y == n - 1 {
                north.push(dart_between(&g, e, id(x, y)));
            }
        }
    }
    Ok(Preset {
        kind: PresetKind::TorusGrid { m, n },
        graph: g,
        generators: vec![
            Generator {
                name: "east",
                darts: east,
            },
            Generator {
                name: "north",
                darts: north,
            },
        ],
    })
}

/// Torus grid with only east and north arcs (unit weights).
#[derive(Debug, Clone, PartialEq)]
pub struct DirectedTorus {
    pub m: usize,
    pub n: usize,
    pub digraph: Digraph,
    /// Arcs `(m-1, y) → (0, y)`.
    pub east_wrap: Vec<usize>,
    /// Arcs `(x, n-1) → (x, 0)`.
    pub north_wrap: Vec<usize>,
}

/// Directed `m × n` torus; vertex `(x, y)` has id `x + m·y`, arcs are stored
/// east then north for each vertex. `m = 1` or `n = 1` produce self-loops.
pub fn directed_torus(m: usize, n: usize) -> Result<DirectedTorus> {
    if m == 0 || n == 0 {
        return Err(Error::invalid("directed torus needs m, n >= 1"));
    }
    let id = |x: usize, y: usize| x + m * y;
    let mut d = Digraph::new(m * n);
    let (mut east_wrap, mut north_wrap) = (Vec::new(), Vec::new());
    for y in 0..n {
        for x in 0..m {
            let a = d.add_arc(id(x, y), id((x + 1) % m, y), 1.0)?;
            if x == m - 1 {
                east_wrap.push(a);
            }
            let a = d.add_arc(id(x, y), id(x, (y + 1) % n), 1.0)?;
            if y == n - 1 {
                north_wrap.push(a);
            }
        }
    }
    Ok(DirectedTorus {
        m,
        n,
        digraph: d,
        east_wrap,
        north_wrap,
    })
}

/// Planar `rows × cols` grid of vertices at integer coordinates; vertex
/// `(r, c)` has id `r·cols + c` and sits at `(c, r)`.
pub fn grid(rows: usize, cols: usize) -> Result<Graph> {
    if rows == 0 || cols == 0 {
        return Err(Error::invalid("grid needs at least one row and column"));
    }
    let id = |r: usize, c: usize| r * cols + c;
    let mut g = Graph::new(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                g.add_edge(id(r, c), id(r, c + 1), 1.0)?;
            }
            if r + 1 < rows {
                g.add_edge(id(r, c), id(r + 1, c), 1.0)?;
            }
        }
    }
    let coords = (0..rows * cols)
        .map(|v| ((v % cols) as f64, (v / cols) as f64))
        .collect();
    g.set_coords(coords)?;
    Ok(g)
}

/// `k` nested loops around an annulus joined in a chain: loop `i` is the
/// triangle on `3i, 3i+1, 3i+2`, consecutive loops share the radial edge
/// `3i – 3(i+1)`, and every loop crosses the cut once through `3i+2 → 3i`.
pub fn chain_of_loops(k: usize) -> Result<Preset> {
    if k == 0 {
        return Err(Error::invalid("chain of loops needs k >= 1"));
    }
    let mut g = Graph::new(3 * k);
    let mut darts = Vec::with_capacity(k);
    for i in 0..k {
        let b = 3 * i;
        g.add_edge(b, b + 1, 1.0)?;
        g.add_edge(b + 1, b + 2, 1.0)?;
        let e = g.add_edge(b + 2, b, 1.0)?;
        darts.push(dart_between(&g, e, b + 2));
    }
    for i in 0..k - 1 {
        g.add_edge(3 * i, 3 * (i + 1), 1.0)?;
    }
    Ok(Preset {
        kind: PresetKind::ChainOfLoops { k },
        graph: g,
        generators: vec![Generator {
            name: "winding",
            darts,
        }],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cylinder_counts() {
        let p = cylinder(1, 3).unwrap();
        assert_eq!((p.graph.n(), p.graph.m()), (3, 3));
        let p = cylinder(2, 4).unwrap();
        assert_eq!((p.graph.n(), p.graph.m()), (8, 12));
        for (m, n) in [(3, 5), (4, 8), (2, 7)] {
            assert_eq!(cylinder(m, n).unwrap().graph.m(), n * (2 * m - 1));
        }
        assert!(cylinder(2, 2).is_err());
    }

    #[test]
    fn cylinder_degrees() {
        let p = cylinder(3, 5).unwrap();
        for v in 0..15 {
            let want = if (5..10).contains(&v) { 4 } else { 3 };
            assert_eq!(p.graph.degree(v), want, "vertex {v}");
        }
    }

    #[test]
    fn winding_darts_point_forward_around_the_ring() {
        let p = cylinder(2, 5).unwrap();
        let g = &p.graph;
        for (i, d) in p.generators[0].darts.iter().enumerate() {
            assert_eq!((g.src(*d), g.dst(*d)), (i * 5 + 4, i * 5));
        }
    }

    #[test]
    fn torus_counts() {
        let p = torus(3, 3).unwrap();
        assert_eq!((p.graph.n(), p.graph.m()), (9, 18));
        assert!((0..9).all(|v| p.graph.degree(v) == 4));
        let p = torus(4, 3).unwrap();
        assert_eq!(p.graph.m(), 24);
        assert_eq!(
            (p.generators[0].darts.len(), p.generators[1].darts.len()),
            (3, 4)
        );
    }

    #[test]
    fn directed_torus_counts() {
        let t = directed_torus(2, 2).unwrap();
        assert_eq!((t.digraph.n(), t.digraph.arcs().len()), (4, 8));
        let t = directed_torus(1, 1).unwrap();
        assert!(t.digraph.arcs().iter().all(|a| a.tail == a.head));
    }

    #[test]
    fn chain_shape() {
        let p = chain_of_loops(3).unwrap();
        assert_eq!((p.graph.n(), p.graph.m()), (9, 11));
        assert!(p.graph.is_connected());
    }
}
