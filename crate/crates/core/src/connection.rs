//! Parallel transports on edges.
//!
//! Transports are stored for the canonical orientation of each edge only; the
//! reverse traversal uses the inverse. The monodromy of a walk
//! `v0 → v1 → … → vk` is the ordered product `φ_{v0v1} φ_{v1v2} ⋯`, and a
//! gauge change `ψ` acts by `φ'_{vv'} = ψ_v φ_{vv'} ψ_{v'}⁻¹`, which conjugates
//! monodromies by `ψ_{v0}` and the Laplacian by `diag(ψ)`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{DirEdge, Graph, PlanarEmbedding};
use crate::linalg::{Mat2, C64};
use crate::tolerance::Tolerances;

/// A single transport value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transport {
    Line(C64),
    Sl2(Mat2),
}

/// Line-bundle connection: one nonzero complex number per canonical edge.
#[derive(Debug, Clone, PartialEq)]
pub struct LineConnection {
    phi: Vec<C64>,
}

impl LineConnection {
    pub fn trivial(m: usize) -> Self {
        LineConnection {
            phi: vec![C64::new(1.0, 0.0); m],
        }
    }

    pub fn new(phi: Vec<C64>) -> Result<Self> {
        if let Some(i) = phi.iter().position(|p| !(p.norm() > 0.0 && p.is_finite())) {
            return Err(Error::invalid(format!(
                "transport on edge {i} is zero or not finite"
            )));
        }
        Ok(LineConnection { phi })
    }

    /// Independent uniformly random unit transports.
    pub fn random_unitary(m: usize, rng: &mut impl Rng) -> Self {
        let phi = (0..m)
            .map(|_| C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU)))
            .collect();
        LineConnection { phi }
    }

    /// Transport `z` on the given traversals (so `1/z` against them), `1` elsewhere.
    pub fn with_darts(m: usize, darts: &[DirEdge], z: C64) -> Self {
        let mut c = Self::trivial(m);
        c.multiply_darts(darts, z);
        c
    }

    /// Multiplies the transport along each traversal by `z`.
    pub fn multiply_darts(&mut self, darts: &[DirEdge], z: C64) {
        for d in darts {
            let f = if d.forward { z } else { z.inv() };
            self.phi[d.edge] *= f;
        }
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    pub fn values(&self) -> &[C64] {
        &self.phi
    }

    /// Transport `φ_{tail,head}` of edge `e`.
    pub fn get(&self, e: usize) -> C64 {
        self.phi[e]
    }

    pub fn set(&mut self, e: usize, v: C64) {
        self.phi[e] = v;
    }

    /// Transport along a traversal.
    pub fn along(&self, d: DirEdge) -> C64 {
        if d.forward {
            self.phi[d.edge]
        } else {
            self.phi[d.edge].inv()
        }
    }

    pub fn unitary_deviation(&self) -> f64 {
        self.phi
            .iter()
            .map(|p| (p.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_unitary(&self, tol: &Tolerances) -> bool {
        self.unitary_deviation() <= tol.unitary
    }

    pub fn require_unitary(&self, tol: &Tolerances) -> Result<()> {
        let deviation = self.unitary_deviation();
        if deviation > tol.unitary {
            return Err(Error::NonUnitary { deviation });
        }
        Ok(())
    }

    pub fn monodromy(&self, g: &Graph, walk: &[DirEdge]) -> Result<C64> {
        self.check_len(g)?;
        g.check_closed(walk)?;
        Ok(walk.iter().map(|&d| self.along(d)).product())
    }

    pub fn gauge(&self, g: &Graph, psi: &[C64]) -> Result<Self> {
        self.check_len(g)?;
        if psi.len() != g.n() {
            return Err(Error::Dimension {
                expected: g.n(),
                actual: psi.len(),
            });
        }
        if let Some(v) = psi.iter().position(|p| p.norm() == 0.0 || !p.is_finite()) {
            return Err(Error::invalid(format!(
                "gauge at vertex {v} is not invertible"
            )));
        }
        let phi = g
            .edges()
            .iter()
            .zip(&self.phi)
            .map(|(e, &p)| psi[e.tail] * p / psi[e.head])
            .collect();
        Ok(LineConnection { phi })
    }

    /// Gauge in which every edge of a BFS tree from vertex 0 carries transport 1.
    pub fn tree_gauge(&self, g: &Graph) -> Result<(Self, Vec<C64>)> {
        self.check_len(g)?;
        let parent = g
            .bfs_tree(0)
            .ok_or_else(|| Error::invalid("tree gauge needs a connected graph"))?;
        let mut psi = vec![C64::new(0.0, 0.0); g.n()];
        for v in bfs_order(g, &parent) {
            psi[v] = match parent[v] {
                None => C64::new(1.0, 0.0),
                Some(d) => psi[g.src(d)] * self.along(d),
            };
        }
        Ok((self.gauge(g, &psi)?, psi))
    }

    fn check_len(&self, g: &Graph) -> Result<()> {
        if self.phi.len() != g.m() {
            return Err(Error::Dimension {
                expected: g.m(),
                actual: self.phi.len(),
            });
        }
        Ok(())
    }
}

/// Vertices ordered so that every vertex follows its BFS parent.
fn bfs_order(g: &Graph, parent: &[Option<DirEdge>]) -> Vec<usize> {
    let mut children = vec![Vec::new(); g.n()];
    let mut roots = Vec::new();
    for (v, p) in parent.iter().enumerate() {
        match p {
            Some(d) => children[g.src(*d)].push(v),
            None => roots.push(v),
        }
    }
    let mut order = Vec::with_capacity(g.n());
    let mut stack = roots;
    while let Some(v) = stack.pop() {
        order.push(v);
        stack.extend(children[v].iter().copied());
    }
    order
}

/// SL₂ connection: one 2×2 matrix of determinant 1 per canonical edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Sl2Connection {
    phi: Vec<Mat2>,
}

impl Sl2Connection {
    pub fn trivial(m: usize) -> Self {
        Sl2Connection {
            phi: vec![Mat2::IDENTITY; m],
        }
    }

    pub fn new(phi: Vec<Mat2>, tol: &Tolerances) -> Result<Self> {
        for (i, p) in phi.iter().enumerate() {
            let dev = (p.det() - 1.0).norm();
            if dev > tol.sl2_det {
                return Err(Error::invalid(format!(
                    "transport on edge {i} has |det - 1| = {dev:.3e}"
                )));
            }
        }
        Ok(Sl2Connection { phi })
    }

    /// Random transports `exp`-free: a random matrix rescaled to determinant 1.
    pub fn random(m: usize, spread: f64, rng: &mut impl Rng) -> Self {
        let phi = (0..m)
            .map(|_| loop {
                let mut r = || {
                    C64::new(
                        rng.random_range(-spread..spread),
                        rng.random_range(-spread..spread),
                    )
                };
                let a = Mat2::IDENTITY + Mat2::new(r(), r(), r(), r());
                let det = a.det();
                if det.norm() > 0.1 {
                    break a.scale(det.sqrt().inv());
                }
            })
            .collect();
        Sl2Connection { phi }
    }

    pub fn with_darts(m: usize, darts: &[DirEdge], a: Mat2) -> Result<Self> {
        let mut c = Self::trivial(m);
        c.multiply_darts(darts, a)?;
        Ok(c)
    }

    /// Right-multiplies the transport along each traversal by `a`.
    pub fn multiply_darts(&mut self, darts: &[DirEdge], a: Mat2) -> Result<()> {
        let inv = a.inverse()?;
        for d in darts {
            let p = &mut self.phi[d.edge];
            *p = if d.forward { *p * a } else { inv * *p };
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    pub fn values(&self) -> &[Mat2] {
        &self.phi
    }

    pub fn get(&self, e: usize) -> Mat2 {
        self.phi[e]
    }

    /// Transport along a traversal; the reverse uses the adjugate, which is
    /// the inverse in SL₂.
    pub fn along(&self, d: DirEdge) -> Mat2 {
        if d.forward {
            self.phi[d.edge]
        } else {
            self.phi[d.edge].adj()
        }
    }

    pub fn monodromy(&self, g: &Graph, walk: &[DirEdge]) -> Result<Mat2> {
        if self.phi.len() != g.m() {
            return Err(Error::Dimension {
                expected: g.m(),
                actual: self.phi.len(),
            });
        }
        g.check_closed(walk)?;
        Ok(walk
            .iter()
            .fold(Mat2::IDENTITY, |acc, &d| acc * self.along(d)))
    }

    pub fn gauge(&self, g: &Graph, psi: &[Mat2]) -> Result<Self> {
        if psi.len() != g.n() {
            return Err(Error::Dimension {
                expected: g.n(),
                actual: psi.len(),
            });
        }
        let inv: Vec<Mat2> = psi.iter().map(|p| p.inverse()).collect::<Result<_>>()?;
        let phi = g
            .edges()
            .iter()
            .zip(&self.phi)
            .map(|(e, &p)| psi[e.tail] * p * inv[e.head])
            .collect();
        Ok(Sl2Connection { phi })
    }

    /// Line connection embedded as scalar matrices, for rank comparisons.
    pub fn from_line(line: &LineConnection) -> Self {
        Sl2Connection {
            phi: line.values().iter().map(|&z| Mat2::scalar(z)).collect(),
        }
    }
}

/// Either kind of connection.
#[derive(Debug, Clone, PartialEq)]
pub enum Connection {
    Line(LineConnection),
    Sl2(Sl2Connection),
}

impl Connection {
    pub fn len(&self) -> usize {
        match self {
            Connection::Line(c) => c.len(),
            Connection::Sl2(c) => c.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn monodromy(&self, g: &Graph, walk: &[DirEdge]) -> Result<Transport> {
        match self {
            Connection::Line(c) => c.monodromy(g, walk).map(Transport::Line),
            Connection::Sl2(c) => c.monodromy(g, walk).map(Transport::Sl2),
        }
    }
}

/// Edges dual to a simple dual path from `face` to the outer face, oriented
/// with the face nearer `face` on the left.
#[derive(Debug, Clone, PartialEq)]
pub struct Zipper {
    pub face: usize,
    pub darts: Vec<DirEdge>,
}

impl Zipper {
    /// Uses a BFS dual path; see [`PlanarEmbedding::dual_path`].
    pub fn new(emb: &PlanarEmbedding, face: usize) -> Result<Self> {
        Self::constrained(emb, face, &[], |_| true)
    }

    pub fn constrained(
        emb: &PlanarEmbedding,
        face: usize,
        blocked: &[usize],
        exit: impl Fn(usize) -> bool,
    ) -> Result<Self> {
        let darts = emb.dual_path(face, blocked, exit)?;
        Ok(Zipper { face, darts })
    }

    /// Faces crossed by the dual path, excluding the outer face.
    pub fn faces(&self, emb: &PlanarEmbedding) -> Vec<usize> {
        self.darts.iter().map(|&d| emb.left_of(d)).collect()
    }

    pub fn line(&self, m: usize, b: C64) -> LineConnection {
        LineConnection::with_darts(m, &self.darts, b)
    }
}

/// Counterclockwise boundary walk of a bounded face.
pub fn face_walk(emb: &PlanarEmbedding, face: usize) -> Vec<DirEdge> {
    emb.face(face).darts.clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::grid;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn k3() -> Graph {
        Graph::unit(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    fn triangle_walk() -> Vec<DirEdge> {
        vec![
            DirEdge::new(0, true),
            DirEdge::new(1, true),
            DirEdge::new(2, false),
        ]
    }

    #[test]
    fn k3_monodromy() {
        let (z12, z23, z13) = (C64::new(0.3, 0.8), C64::new(-1.1, 0.2), C64::new(0.5, -0.5));
        let c = LineConnection::new(vec![z12, z23, z13]).unwrap();
        let m = c.monodromy(&k3(), &triangle_walk()).unwrap();
        assert!((m - z12 * z23 / z13).norm() < 1e-15);
        let rev: Vec<_> = triangle_walk().iter().rev().map(|d| d.reversed()).collect();
        assert!((m * c.monodromy(&k3(), &rev).unwrap() - 1.0).norm() < 1e-14);
        assert_eq!(
            LineConnection::trivial(3)
                .monodromy(&k3(), &triangle_walk())
                .unwrap(),
            C64::new(1.0, 0.0)
        );
    }

    #[test]
    fn open_walk_is_rejected() {
        let c = LineConnection::trivial(3);
        assert!(matches!(
            c.monodromy(&k3(), &triangle_walk()[..2]),
            Err(Error::NotClosed { .. })
        ));
    }

    #[test]
    fn sl2_monodromy_and_reverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let c = Sl2Connection::random(3, 0.5, &mut rng);
        let g = k3();
        let m = c.monodromy(&g, &triangle_walk()).unwrap();
        let rev: Vec<_> = triangle_walk().iter().rev().map(|d| d.reversed()).collect();
        assert!((m * c.monodromy(&g, &rev).unwrap()).dist(&Mat2::IDENTITY) < 1e-12);
    }

    #[test]
    fn gauge_conjugates_monodromy() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = k3();
        let c = Sl2Connection::random(3, 0.5, &mut rng);
        let psi: Vec<Mat2> = Sl2Connection::random(3, 0.5, &mut rng).values().to_vec();
        let gc = c.gauge(&g, &psi).unwrap();
        let m = c.monodromy(&g, &triangle_walk()).unwrap();
        let gm = gc.monodromy(&g, &triangle_walk()).unwrap();
        let expect = psi[0] * m * psi[0].inverse().unwrap();
        assert!(gm.dist(&expect) < 1e-12);
        assert_eq!(c.gauge(&g, &[Mat2::IDENTITY; 3]).unwrap(), c);
    }

    #[test]
    fn tree_gauge_trivialises_tree_edges() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = grid(3, 3).unwrap();
        let c = LineConnection::random_unitary(g.m(), &mut rng);
        let (gc, _) = c.tree_gauge(&g).unwrap();
        let parent = g.bfs_tree(0).unwrap();
        for d in parent.iter().flatten() {
            assert!((gc.get(d.edge) - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn zipper_puts_monodromy_on_one_face() {
        let g = grid(3, 4).unwrap();
        let emb = PlanarEmbedding::new(&g).unwrap();
        let b = C64::from_polar(1.0, 0.7);
        for f in emb.bounded_faces() {
            let z = Zipper::new(&emb, f).unwrap();
            let conn = z.line(g.m(), b);
            for h in emb.bounded_faces() {
                let m = conn.monodromy(&g, &face_walk(&emb, h)).unwrap();
                let want = if h == f { b } else { C64::new(1.0, 0.0) };
                assert!((m - want).norm() < 1e-12, "zipper {f}, face {h}");
            }
        }
    }

    #[test]
    fn two_sl2_zippers() {
        let g = grid(4, 4).unwrap();
        let emb = PlanarEmbedding::new(&g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let ab = Sl2Connection::random(2, 0.4, &mut rng);
        let (a, b) = (ab.get(0), ab.get(1));
        let f1 = emb.locate(&g, (0.5, 1.5)).unwrap();
        let f2 = emb.locate(&g, (2.5, 1.5)).unwrap();
        let z1 = Zipper::new(&emb, f1).unwrap();
        let z2 = Zipper::constrained(&emb, f2, &z1.faces(&emb), |_| true).unwrap();
        let mut conn = Sl2Connection::with_darts(g.m(), &z1.darts, a).unwrap();
        conn.multiply_darts(&z2.darts, b).unwrap();
        for h in emb.bounded_faces() {
            let m = conn.monodromy(&g, &face_walk(&emb, h)).unwrap();
            let want = if h == f1 {
                a
            } else if h == f2 {
                b
            } else {
                Mat2::IDENTITY
            };
            assert!(m.dist(&want) < 1e-12, "face {h}");
        }
    }
}
