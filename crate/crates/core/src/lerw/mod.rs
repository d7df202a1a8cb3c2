//! Loop-erased random walk functionals through zipper connections.
//!
//! Both endpoints `z1`, `z2` lie on the outer face. The outer boundary splits
//! into the counterclockwise arc from `z1` to `z2` (the "east" arc) and the one
//! from `z2` back to `z1` (the "west" arc). Zippers always exit through the
//! east arc. A path from `z1` to `z2` passes *left* of a face when the face is
//! on its right, i.e. outside the region bounded by the path and the west arc.

mod crossing;
mod one_hole;
mod two_hole;

pub use crossing::{
    crossing_moments, crossing_pgf, det_expansion, log_derivative, transfer_current_crossings,
    walk_pgf, CrossingMoments, CrossingPgf, DetExpansion, LogDerivative,
};
pub use one_hole::{left_passage_one_hole, OneHoleReport};
pub use two_hole::{
    two_hole_extraction, two_hole_oracle, two_hole_twisted_mass, TwoHoleReport, TwoHoleWeights,
};

use crate::connection::Zipper;
use crate::error::{Error, Result};
use crate::graph::{point_in_polygon, PlanarEmbedding};
use crate::graph::{DirEdge, Graph};
use crate::oracle::lerw_distribution;

/// A plane graph with two marked outer vertices.
#[derive(Debug, Clone)]
pub struct BoundaryPair {
    pub graph: Graph,
    pub emb: PlanarEmbedding,
    pub z1: usize,
    pub z2: usize,
    /// Counterclockwise outer arc from `z1` to `z2`.
    pub east: Vec<DirEdge>,
    /// Counterclockwise outer arc from `z2` to `z1`.
    pub west: Vec<DirEdge>,
}

impl BoundaryPair {
    pub fn new(g: &Graph, z1: usize, z2: usize) -> Result<Self> {
        if g.is_directed() {
            return Err(Error::invalid(
                "LERW functionals need symmetric conductances",
            ));
        }
        if z1 >= g.n() || z2 >= g.n() || z1 == z2 {
            return Err(Error::invalid("LERW endpoints must be distinct vertices"));
        }
        let emb = PlanarEmbedding::new(g)?;
        for z in [z1, z2] {
            if !emb.on_outer(g, z) {
                return Err(Error::invalid(format!(
                    "vertex {z} is not on the outer face"
                )));
            }
        }
        let walk = emb.outer_boundary_ccw();
        let start = walk
            .iter()
            .position(|&d| g.src(d) == z1)
            .expect("z1 is on the outer face");
        let rotated: Vec<DirEdge> = walk[start..]
            .iter()
            .chain(&walk[..start])
            .copied()
            .collect();
        let cut = rotated
            .iter()
            .position(|&d| g.dst(d) == z2)
            .expect("z2 is on the outer face")
            + 1;
        let (east, west) = rotated.split_at(cut);
        Ok(BoundaryPair {
            graph: g.clone(),
            emb,
            z1,
            z2,
            east: east.to_vec(),
            west: west.to_vec(),
        })
    }

    pub fn check_face(&self, f: usize) -> Result<()> {
        if f >= self.emb.faces().len() {
            return Err(Error::invalid(format!("face {f} does not exist")));
        }
        if f == self.emb.outer() {
            return Err(Error::invalid("the face must be bounded"));
        }
        Ok(())
    }

    /// Dual path from `f` to the outer face leaving through the east arc and
    /// avoiding `blocked`.
    pub fn zipper(&self, f: usize, blocked: &[usize]) -> Result<Zipper> {
        self.check_face(f)?;
        let east: Vec<usize> = self.east.iter().map(|d| d.edge).collect();
        Zipper::constrained(&self.emb, f, blocked, |e| east.contains(&e))
    }

    /// Position along the east arc where a zipper exits.
    pub fn exit_position(&self, z: &Zipper) -> usize {
        let last = z.darts.last().expect("zipper is nonempty").edge;
        self.east
            .iter()
            .position(|d| d.edge == last)
            .expect("zipper exits through the east arc")
    }

    /// Whether the path `z1 → z2` passes left of face `f`.
    pub fn passes_left(&self, path: &[DirEdge], f: usize) -> bool {
        let g = &self.graph;
        let xy = self.emb.coords();
        let mut poly: Vec<(f64, f64)> = path.iter().map(|&d| xy[g.src(d)]).collect();
        poly.extend(self.west.iter().map(|&d| xy[g.src(d)]));
        !point_in_polygon(&poly, self.emb.interior_point(g, f))
    }

    /// Exact probability that the loop-erased walk passes left of `f`, by
    /// spanning-tree enumeration.
    pub fn oracle_left(&self, f: usize) -> Result<f64> {
        self.check_face(f)?;
        let law = lerw_distribution(&self.graph, self.z1, self.z2)?;
        Ok(law
            .iter()
            .filter(|(p, _)| self.passes_left(p, f))
            .map(|(_, w)| w)
            .sum())
    }
}

/// Taylor coefficients `a_0..=a_k` of `f` around `center` from the trapezoid
/// rule on the circle of radius `r`.
pub(crate) fn contour_taylor(
    f: impl Fn(crate::C64) -> Result<crate::C64> + Sync,
    center: crate::C64,
    r: f64,
    points: usize,
    k: usize,
) -> Result<Vec<crate::C64>> {
    use crate::par::*;
    use crate::C64;
    let values: Vec<Result<(C64, C64)>> = (0..points)
        .into_par_iter()
        .map(|j| {
            let w = C64::from_polar(r, std::f64::consts::TAU * j as f64 / points as f64);
            Ok((w, f(center + w)?))
        })
        .collect();
    let values = values.into_iter().collect::<Result<Vec<_>>>()?;
    Ok((0..=k)
        .map(|n| {
            values
                .iter()
                .map(|(w, v)| v / w.powu(n as u32))
                .sum::<C64>()
                / points as f64
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::grid;

    #[test]
    fn arcs_split_outer_boundary() {
        let g = grid(3, 3).unwrap();
        let p = BoundaryPair::new(&g, 0, 8).unwrap();
        assert_eq!(p.east.len() + p.west.len(), 8);
        assert_eq!(g.src(p.east[0]), 0);
        assert_eq!(g.dst(*p.east.last().unwrap()), 8);
        // counterclockwise from the bottom-left corner runs along the bottom row
        assert_eq!(g.dst(p.east[0]), 1);
    }

    #[test]
    fn rejects_interior_endpoint_and_outer_face() {
        let g = grid(3, 3).unwrap();
        assert!(matches!(
            BoundaryPair::new(&g, 4, 8),
            Err(Error::Invalid(_))
        ));
        let p = BoundaryPair::new(&g, 0, 8).unwrap();
        assert!(p.check_face(p.emb.outer()).is_err());
    }

    #[test]
    fn contour_recovers_polynomial() {
        use crate::C64;
        let c =
            contour_taylor(|z| Ok(z * z * z - 2.0 * z), C64::new(1.0, 0.0), 0.2, 32, 3).unwrap();
        let want = [-1.0, 1.0, 3.0, 1.0];
        for (a, b) in c.iter().zip(want) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
