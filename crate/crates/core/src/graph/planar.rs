use std::collections::VecDeque;

use super::{DirEdge, Graph};
use crate::error::{Error, Result};

/// A face traced with the face on the left of every dart.
#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub darts: Vec<DirEdge>,
    /// Signed area of the boundary polygon; negative for the outer face.
    pub area: f64,
}

/// Combinatorial embedding of a connected simple plane graph, derived from
/// straight-line vertex coordinates.
#[derive(Debug, Clone)]
pub struct PlanarEmbedding {
    coords: Vec<(f64, f64)>,
    /// Outgoing darts at each vertex in counterclockwise order.
    rotation: Vec<Vec<DirEdge>>,
    faces: Vec<Face>,
    outer: usize,
    /// Face to the left of `[forward, backward]` traversal of each edge.
    left: Vec<[usize; 2]>,
}

impl PlanarEmbedding {
    /// Builds the embedding from the coordinates stored on `g`.
    pub fn new(g: &Graph) -> Result<Self> {
        let coords = g
            .coords()
            .ok_or_else(|| Error::invalid("graph has no vertex coordinates"))?
            .to_vec();
        Self::with_coords(g, coords)
    }

    pub fn with_coords(g: &Graph, coords: Vec<(f64, f64)>) -> Result<Self> {
        if coords.len() != g.n() {
            return Err(Error::Dimension {
                expected: g.n(),
                actual: coords.len(),
            });
        }
        if !g.is_connected() {
            return Err(Error::invalid("planar embedding needs a connected graph"));
        }
        let mut seen = std::collections::HashSet::new();
        for e in g.edges() {
            if !seen.insert((e.tail, e.head)) {
                return Err(Error::invalid(format!(
                    "parallel edges {}-{} cannot be embedded from coordinates",
                    e.tail, e.head
                )));
            }
        }
        let angle = |d: DirEdge| {
            let (a, b) = (coords[g.src(d)], coords[g.dst(d)]);
            (b.1 - a.1).atan2(b.0 - a.0)
        };
        let mut rotation = g.out_darts();
        for darts in rotation.iter_mut() {
            darts.sort_by(|x, y| angle(*x).partial_cmp(&angle(*y)).unwrap());
        }
        let pos = |v: usize, d: DirEdge, rot: &Vec<Vec<DirEdge>>| {
            rot[v].iter().position(|&x| x == d).unwrap()
        };

        let slot = |d: DirEdge| 2 * d.edge + usize::from(!d.forward);
        let mut face_of = vec![usize::MAX; 2 * g.m()];
        let mut faces = Vec::new();
        for start in 0..2 * g.m() {
            if face_of[start] != usize::MAX {
                continue;
            }
            let first = DirEdge::new(start / 2, start % 2 == 0);
            let mut d = first;
            let mut darts = Vec::new();
            loop {
                face_of[slot(d)] = faces.len();
                darts.push(d);
                let v = g.dst(d);
                let back = d.reversed();
                let k = pos(v, back, &rotation);
                let deg = rotation[v].len();
                d = rotation[v][(k + deg - 1) % deg];
                if d == first {
                    break;
                }
            }
            let area = 0.5
                * darts
                    .iter()
                    .map(|&d| {
                        let (a, b) = (coords[g.src(d)], coords[g.dst(d)]);
                        a.0 * b.1 - b.0 * a.1
                    })
                    .sum::<f64>();
            faces.push(Face { darts, area });
        }
        let outer = (0..faces.len())
            .min_by(|&a, &b| faces[a].area.partial_cmp(&faces[b].area).unwrap())
            .unwrap_or(0);
        let euler = g.n() as i64 - g.m() as i64 + faces.len() as i64;
        if g.m() > 0 && euler != 2 {
            return Err(Error::invalid(format!(
                "coordinates do not give a plane embedding (V - E + F = {euler})"
            )));
        }
        if faces
            .iter()
            .enumerate()
            .any(|(i, f)| i != outer && f.area <= 0.0)
        {
            return Err(Error::invalid("edges cross in the given coordinates"));
        }
        let left = (0..g.m())
            .map(|e| [face_of[2 * e], face_of[2 * e + 1]])
            .collect();
        Ok(PlanarEmbedding {
            coords,
            rotation,
            faces,
            outer,
            left,
        })
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face(&self, f: usize) -> &Face {
        &self.faces[f]
    }

    pub fn outer(&self) -> usize {
        self.outer
    }

    pub fn coords(&self) -> &[(f64, f64)] {
        &self.coords
    }

    /// Outgoing darts at `v`, counterclockwise.
    pub fn rotation(&self, v: usize) -> &[DirEdge] {
        &self.rotation[v]
    }

    /// Bounded face ids in order.
    pub fn bounded_faces(&self) -> Vec<usize> {
        (0..self.faces.len()).filter(|&f| f != self.outer).collect()
    }

    pub fn left_of(&self, d: DirEdge) -> usize {
        self.left[d.edge][usize::from(!d.forward)]
    }

    pub fn right_of(&self, d: DirEdge) -> usize {
        self.left_of(d.reversed())
    }

    pub fn euler_characteristic(&self, g: &Graph) -> i64 {
        g.n() as i64 - g.m() as i64 + self.faces.len() as i64
    }

    /// Boundary of the outer face traversed counterclockwise around the graph
    /// (graph interior on the left).
    pub fn outer_boundary_ccw(&self) -> Vec<DirEdge> {
        self.faces[self.outer]
            .darts
            .iter()
            .rev()
            .map(|d| d.reversed())
            .collect()
    }

    /// Whether `v` lies on the outer face.
    pub fn on_outer(&self, g: &Graph, v: usize) -> bool {
        self.faces[self.outer].darts.iter().any(|&d| g.src(d) == v)
    }

    /// Vertex polygon of a face.
    pub fn polygon(&self, g: &Graph, f: usize) -> Vec<(f64, f64)> {
        self.faces[f]
            .darts
            .iter()
            .map(|&d| self.coords[g.src(d)])
            .collect()
    }

    /// A point strictly inside a bounded face: just left of the midpoint of
    /// its first dart.
    pub fn interior_point(&self, g: &Graph, f: usize) -> (f64, f64) {
        let d = self.faces[f].darts[0];
        let (a, b) = (self.coords[g.src(d)], self.coords[g.dst(d)]);
        let len = ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt();
        let shortest = g
            .edges()
            .iter()
            .map(|e| {
                let (p, q) = (self.coords[e.tail], self.coords[e.head]);
                ((q.0 - p.0).powi(2) + (q.1 - p.1).powi(2)).sqrt()
            })
            .fold(f64::INFINITY, f64::min);
        let eps = 1e-3 * shortest;
        let mid = ((a.0 + b.0) / 2.0, (a.1 + b.1) / 2.0);
        (
            mid.0 - eps * (b.1 - a.1) / len,
            mid.1 + eps * (b.0 - a.0) / len,
        )
    }

    /// Shortest dual path from `from` to the outer face by BFS over faces in
    /// edge-id order.
    ///
    /// Returns the crossed edges, each oriented so that the face nearer
    /// `from` is on its left. Faces in `blocked` are never entered, and the
    /// final step into the outer face must use an edge accepted by `exit`.
    pub fn dual_path(
        &self,
        from: usize,
        blocked: &[usize],
        exit: impl Fn(usize) -> bool,
    ) -> Result<Vec<DirEdge>> {
        if from == self.outer {
            return Err(Error::invalid("zipper must start at a bounded face"));
        }
        if from >= self.faces.len() {
            return Err(Error::invalid(format!("face {from} does not exist")));
        }
        let nf = self.faces.len();
        let mut via: Vec<Option<DirEdge>> = vec![None; nf];
        let mut seen = vec![false; nf];
        seen[from] = true;
        for &b in blocked {
            if b != self.outer && b < nf {
                seen[b] = true;
            }
        }
        let mut queue = VecDeque::from([from]);
        while let Some(f) = queue.pop_front() {
            let mut darts = self.faces[f].darts.clone();
            darts.sort();
            for d in darts {
                let next = self.right_of(d);
                if seen[next] {
                    continue;
                }
                if next == self.outer && !exit(d.edge) {
                    continue;
                }
                seen[next] = true;
                via[next] = Some(d);
                if next == self.outer {
                    let mut path = Vec::new();
                    let mut cur = next;
                    while cur != from {
                        let d = via[cur].unwrap();
                        path.push(d);
                        cur = self.left_of(d);
                    }
                    path.reverse();
                    return Ok(path);
                }
                queue.push_back(next);
            }
        }
        Err(Error::invalid(format!(
            "no admissible dual path from face {from} to the outer face"
        )))
    }

    /// Face containing `p` among the bounded faces, by polygon test.
    pub fn locate(&self, g: &Graph, p: (f64, f64)) -> Option<usize> {
        self.bounded_faces()
            .into_iter()
            .find(|&f| point_in_polygon(&self.polygon(g, f), p))
    }
}

/// Even-odd rule point-in-polygon test.
pub fn point_in_polygon(poly: &[(f64, f64)], p: (f64, f64)) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if (a.1 > p.1) != (b.1 > p.1) {
            let x = a.0 + (p.1 - a.1) * (b.0 - a.0) / (b.1 - a.1);
            if p.0 < x {
                inside = !inside;
            }
        }
    }
    inside
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::grid;

    #[test]
    fn grid_faces_satisfy_euler() {
        for (r, c) in [(2, 2), (3, 3), (2, 4), (4, 4)] {
            let g = grid(r, c).unwrap();
            let emb = PlanarEmbedding::new(&g).unwrap();
            assert_eq!(emb.euler_characteristic(&g), 2);
            assert_eq!(emb.faces().len(), (r - 1) * (c - 1) + 1);
            for f in emb.bounded_faces() {
                assert_eq!(emb.face(f).darts.len(), 4);
                assert!((emb.face(f).area - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn every_edge_borders_two_faces() {
        let g = grid(3, 3).unwrap();
        let emb = PlanarEmbedding::new(&g).unwrap();
        let mut count = vec![0; g.m()];
        for f in emb.faces() {
            for d in &f.darts {
                count[d.edge] += 1;
            }
        }
        assert!(count.iter().all(|&c| c == 2));
    }

    #[test]
    fn dual_path_reaches_outer() {
        let g = grid(4, 4).unwrap();
        let emb = PlanarEmbedding::new(&g).unwrap();
        let centre = emb.locate(&g, (1.5, 1.5)).unwrap();
        let path = emb.dual_path(centre, &[], |_| true).unwrap();
        assert_eq!(path.len(), 2);
        assert_eq!(emb.left_of(path[0]), centre);
        assert_eq!(emb.right_of(*path.last().unwrap()), emb.outer());
        assert!(emb.dual_path(emb.outer(), &[], |_| true).is_err());
    }

    #[test]
    fn interior_point_is_inside() {
        let g = grid(3, 4).unwrap();
        let emb = PlanarEmbedding::new(&g).unwrap();
        for f in emb.bounded_faces() {
            let p = emb.interior_point(&g, f);
            assert_eq!(emb.locate(&g, p), Some(f));
        }
    }

    #[test]
    fn outer_boundary_is_counterclockwise() {
        let g = grid(2, 3).unwrap();
        let emb = PlanarEmbedding::new(&g).unwrap();
        let walk = emb.outer_boundary_ccw();
        assert_eq!(walk.len(), 6);
        let area: f64 = walk
            .iter()
            .map(|&d| {
                let (a, b) = (emb.coords()[g.src(d)], emb.coords()[g.dst(d)]);
                a.0 * b.1 - b.0 * a.1
            })
            .sum();
        assert!(area > 0.0);
    }
}
