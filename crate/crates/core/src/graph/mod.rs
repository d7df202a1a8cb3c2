//! Finite multigraphs with conductances, directed graphs, presets and planar
//! embeddings.

mod builders;
mod io;
mod planar;

pub use builders::{
    chain_of_loops, cycle, cylinder, directed_torus, grid, path, torus, Generator, Preset,
    PresetKind,
};
pub use io::{parse_graph_file, write_graph_file, GraphFile};
pub use planar::{point_in_polygon, Face, PlanarEmbedding};

use crate::error::{Error, Result};

/// An undirected edge stored with its canonical orientation `tail < head`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    /// Conductance `c_{tail,head}`.
    pub conductance: f64,
    /// `c_{head,tail}` when it differs from `conductance`.
    pub reverse: Option<f64>,
}

impl Edge {
    pub fn forward_weight(&self) -> f64 {
        self.conductance
    }

    pub fn backward_weight(&self) -> f64 {
        self.reverse.unwrap_or(self.conductance)
    }

    /// Endpoint opposite `v`.
    pub fn other(&self, v: usize) -> usize {
        if v == self.tail {
            self.head
        } else {
            self.tail
        }
    }
}

/// One traversal direction of an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DirEdge {
    pub edge: usize,
    /// `true` when traversed tail → head.
    pub forward: bool,
}

impl DirEdge {
    pub fn new(edge: usize, forward: bool) -> Self {
        DirEdge { edge, forward }
    }

    pub fn reversed(self) -> Self {
        DirEdge {
            edge: self.edge,
            forward: !self.forward,
        }
    }
}

/// Undirected multigraph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    boundary: Vec<usize>,
    coords: Option<Vec<(f64, f64)>>,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Graph {
            n,
            edges: Vec::new(),
            boundary: Vec::new(),
            coords: None,
        }
    }

    /// Builds a graph from `(a, b, c)` triples.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut g = Graph::new(n);
        for &(a, b, c) in edges {
            g.add_edge(a, b, c)?;
        }
        Ok(g)
    }

    pub fn unit(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Graph::new(n);
        for &(a, b) in edges {
            g.add_edge(a, b, 1.0)?;
        }
        Ok(g)
    }

    /// Adds an edge with symmetric conductance; returns its id.
    pub fn add_edge(&mut self, a: usize, b: usize, c: f64) -> Result<usize> {
        self.insert(a, b, c, None)
    }

    /// Adds an edge with weight `c_ab` from `a` to `b` and `c_ba` back.
    pub fn add_weighted_edge(&mut self, a: usize, b: usize, c_ab: f64, c_ba: f64) -> Result<usize> {
        self.insert(a, b, c_ab, Some(c_ba))
    }

    fn insert(&mut self, a: usize, b: usize, c_ab: f64, c_ba: Option<f64>) -> Result<usize> {
        if a >= self.n || b >= self.n {
            return Err(Error::invalid(format!(
                "edge {a}-{b} references a vertex outside 0..{}",
                self.n
            )));
        }
        if a == b {
            return Err(Error::invalid(format!("self-loop at vertex {a}")));
        }
        for c in std::iter::once(c_ab).chain(c_ba) {
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::invalid(format!(
                    "edge {a}-{b} has non-positive conductance {c}"
                )));
            }
        }
        let edge = if a < b {
            Edge {
                tail: a,
                head: b,
                conductance: c_ab,
                reverse: c_ba,
            }
        } else {
            match c_ba {
                Some(back) => Edge {
                    tail: b,
                    head: a,
                    conductance: back,
                    reverse: Some(c_ab),
                },
                None => Edge {
                    tail: b,
                    head: a,
                    conductance: c_ab,
                    reverse: None,
                },
            }
        };
        self.edges.push(edge);
        Ok(self.edges.len() - 1)
    }

    pub fn set_boundary(&mut self, s: Vec<usize>) -> Result<()> {
        let mut s = s;
        s.sort_unstable();
        s.dedup();
        if let Some(&v) = s.iter().find(|&&v| v >= self.n) {
            return Err(Error::invalid(format!("boundary vertex {v} out of range")));
        }
        self.boundary = s;
        Ok(())
    }

    pub fn with_boundary(mut self, s: Vec<usize>) -> Result<Self> {
        self.set_boundary(s)?;
        Ok(self)
    }

    pub fn set_coords(&mut self, coords: Vec<(f64, f64)>) -> Result<()> {
        if coords.len() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                actual: coords.len(),
            });
        }
        self.coords = Some(coords);
        Ok(())
    }

    pub fn coords(&self) -> Option<&[(f64, f64)]> {
        self.coords.as_deref()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    /// Whether any edge carries an asymmetric weight.
    pub fn is_directed(&self) -> bool {
        self.edges
            .iter()
            .any(|e| e.reverse.is_some_and(|r| r != e.conductance))
    }

    /// Source vertex of a traversal.
    pub fn src(&self, d: DirEdge) -> usize {
        let e = &self.edges[d.edge];
        if d.forward {
            e.tail
        } else {
            e.head
        }
    }

    /// Target vertex of a traversal.
    pub fn dst(&self, d: DirEdge) -> usize {
        let e = &self.edges[d.edge];
        if d.forward {
            e.head
        } else {
            e.tail
        }
    }

    /// Weight of a traversal, `c_{src,dst}`.
    pub fn weight(&self, d: DirEdge) -> f64 {
        let e = &self.edges[d.edge];
        if d.forward {
            e.forward_weight()
        } else {
            e.backward_weight()
        }
    }

    /// Traversals leaving each vertex, in edge-id order.
    pub fn out_darts(&self) -> Vec<Vec<DirEdge>> {
        let mut adj = vec![Vec::new(); self.n];
        for (id, e) in self.edges.iter().enumerate() {
            adj[e.tail].push(DirEdge::new(id, true));
            adj[e.head].push(DirEdge::new(id, false));
        }
        adj
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges
            .iter()
            .filter(|e| e.tail == v || e.head == v)
            .count()
    }

    /// Total outgoing conductance at `v`.
    pub fn weighted_degree(&self, v: usize) -> f64 {
        self.edges
            .iter()
            .map(|e| {
                if e.tail == v {
                    e.forward_weight()
                } else if e.head == v {
                    e.backward_weight()
                } else {
                    0.0
                }
            })
            .sum()
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let adj = self.out_darts();
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for d in &adj[v] {
                let w = self.dst(*d);
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.n
    }

    /// BFS spanning tree from `root`: for every other vertex, the traversal
    /// by which it was reached. `None` if the graph is disconnected.
    pub fn bfs_tree(&self, root: usize) -> Option<Vec<Option<DirEdge>>> {
        let adj = self.out_darts();
        let mut parent = vec![None; self.n];
        let mut seen = vec![false; self.n];
        let mut queue = std::collections::VecDeque::from([root]);
        seen[root] = true;
        while let Some(v) = queue.pop_front() {
            for &d in &adj[v] {
                let w = self.dst(d);
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(d);
                    queue.push_back(w);
                }
            }
        }
        seen.iter().all(|&s| s).then_some(parent)
    }

    /// Whether the traversals form a closed walk.
    pub fn check_closed(&self, walk: &[DirEdge]) -> Result<()> {
        if walk.is_empty() {
            return Err(Error::invalid("empty walk"));
        }
        for pair in walk.windows(2) {
            if self.dst(pair[0]) != self.src(pair[1]) {
                return Err(Error::NotClosed {
                    start: self.src(pair[1]),
                    end: self.dst(pair[0]),
                });
            }
        }
        let (start, end) = (self.src(walk[0]), self.dst(*walk.last().unwrap()));
        if start != end {
            return Err(Error::NotClosed { start, end });
        }
        Ok(())
    }

    /// Every edge doubled into a pair of arcs, in edge order (forward then backward).
    pub fn to_digraph(&self) -> Digraph {
        let mut d = Digraph::new(self.n);
        for e in &self.edges {
            d.arcs.push(Arc {
                tail: e.tail,
                head: e.head,
                weight: e.forward_weight(),
            });
            d.arcs.push(Arc {
                tail: e.head,
                head: e.tail,
                weight: e.backward_weight(),
            });
        }
        d
    }
}

/// A weighted arc; self-loops are allowed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub tail: usize,
    pub head: usize,
    pub weight: f64,
}

/// Directed multigraph used for oriented-forest models.
#[derive(Debug, Clone, PartialEq)]
pub struct Digraph {
    n: usize,
    arcs: Vec<Arc>,
}

impl Digraph {
    pub fn new(n: usize) -> Self {
        Digraph {
            n,
            arcs: Vec::new(),
        }
    }

    pub fn add_arc(&mut self, tail: usize, head: usize, weight: f64) -> Result<usize> {
        if tail >= self.n || head >= self.n {
            return Err(Error::invalid(format!("arc {tail}->{head} out of range")));
        }
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::invalid(format!(
                "arc {tail}->{head} has non-positive weight {weight}"
            )));
        }
        self.arcs.push(Arc { tail, head, weight });
        Ok(self.arcs.len() - 1)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    /// Arc ids leaving each vertex.
    pub fn out_arcs(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n];
        for (i, a) in self.arcs.iter().enumerate() {
            out[a.tail].push(i);
        }
        out
    }
}
