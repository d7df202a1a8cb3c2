use super::BoundaryPair;
use crate::connection::LineConnection;
use crate::error::{Error, Result};
use crate::graph::{DirEdge, Graph};
use crate::laplacian::{BundleLaplacian, Variant};
use crate::linalg::{CMatrix, C64};

/// Step sizes `b - 1` for the limit `b → 1`.
const EPS: [f64; 2] = [1e-3, 5e-4];

/// Left-passage probability of the loop-erased walk around one face.
#[derive(Debug, Clone)]
pub struct OneHoleReport {
    pub z1: usize,
    pub z2: usize,
    pub face: usize,
    pub zipper: Vec<DirEdge>,
    /// Limit of the zipper-Green ratio, Richardson-extrapolated over `eps`.
    pub limit_route: f64,
    /// One minus the current across the zipper at the trivial connection.
    pub current_route: f64,
    pub eps: [f64; 2],
}

impl OneHoleReport {
    pub fn probability(&self) -> f64 {
        self.current_route
    }

    pub fn route_gap(&self) -> f64 {
        (self.limit_route - self.current_route).abs()
    }
}

/// Probability that the loop-erased walk from `z1` to `z2` passes left of
/// face `f`.
pub fn left_passage_one_hole(g: &Graph, z1: usize, z2: usize, f: usize) -> Result<OneHoleReport> {
    let pair = BoundaryPair::new(g, z1, z2)?;
    let zipper = pair.zipper(f, &[])?;
    let ratio = |eps: f64| -> Result<f64> {
        let b = C64::new(1.0 + eps, 0.0);
        let lap = BundleLaplacian::line(
            g,
            &LineConnection::with_darts(g.m(), &zipper.darts, b),
            Variant::Weighted,
        )?;
        let green = lap.green()?;
        let (g21, g12) = (green[(z2, z1)], green[(z1, z2)]);
        let value = (b * b * g21 - g12) / ((b - 1.0) * (b * g21 + g12));
        Ok(value.re)
    };
    let (coarse, fine) = (ratio(EPS[0])?, ratio(EPS[1])?);
    let limit_route = 2.0 * fine - coarse;
    let crossings = current_crossings(g, &zipper.darts, z1, z2)?;
    Ok(OneHoleReport {
        z1,
        z2,
        face: f,
        zipper: zipper.darts,
        limit_route,
        current_route: 1.0 - crossings,
        eps: EPS,
    })
}

/// Grounded weighted Green's function: the inverse of the trivial Laplacian
/// with vertex `ground` removed, padded with a zero row and column.
pub(crate) fn grounded_green(g: &Graph, ground: usize) -> Result<CMatrix> {
    let lap = BundleLaplacian::line(g, &LineConnection::trivial(g.m()), Variant::Weighted)?;
    let rest: Vec<usize> = (0..g.n()).filter(|&v| v != ground).collect();
    let inv = lap
        .matrix()
        .principal(&rest)
        .lu()?
        .guarded_inverse(lap.tolerances().condition)?;
    let mut out = CMatrix::zeros(g.n(), g.n());
    for (i, &a) in rest.iter().enumerate() {
        for (j, &b) in rest.iter().enumerate() {
            out[(a, b)] = inv[(i, j)];
        }
    }
    Ok(out)
}

/// Expected signed number of crossings of `darts` by the walk started at `v`
/// and stopped at `vp`, written as current flow: with unit current entering
/// at `v` and leaving at `vp`, the net current along each dart `u → w` is
/// `c (G0(v,u) - G0(v,w) - G0(vp,u) + G0(vp,w))`.
pub(crate) fn current_crossings(g: &Graph, darts: &[DirEdge], v: usize, vp: usize) -> Result<f64> {
    if v >= g.n() || vp >= g.n() {
        return Err(Error::invalid("vertex out of range"));
    }
    let g0 = grounded_green(g, vp)?;
    Ok(darts
        .iter()
        .map(|&d| {
            let (u, w) = (g.src(d), g.dst(d));
            let c = g.edge(d.edge).conductance;
            c * (g0[(v, u)] - g0[(v, w)] - g0[(vp, u)] + g0[(vp, w)]).re
        })
        .sum())
}
