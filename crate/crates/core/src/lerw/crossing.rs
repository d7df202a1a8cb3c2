use super::contour_taylor;
use super::one_hole::current_crossings;
use crate::connection::LineConnection;
use crate::error::{Error, Result};
use crate::graph::{DirEdge, Graph};
use crate::laplacian::{tree_count, BundleLaplacian, Variant};
use crate::linalg::{CMatrix, C64};

const CONTOUR_RADIUS: f64 = 0.1;
const CONTOUR_POINTS: usize = 64;

/// Crossing generating functions at one point `z`, from both sides.
#[derive(Debug, Clone, Copy)]
pub struct CrossingPgf {
    pub z: C64,
    /// `E[z^k]` for the walk `v → vp` by the absorbing chain.
    pub walk_chain: C64,
    /// `G(v, vp) / G(vp, vp)`.
    pub walk_green: C64,
    /// `E[z^k]` for the excursion from `vp` back to `vp` by the absorbing chain.
    pub return_chain: C64,
    /// `1 - 1 / (G(vp, vp) deg vp)`.
    pub return_green: C64,
}

impl CrossingPgf {
    pub fn walk_gap(&self) -> f64 {
        (self.walk_chain - self.walk_green).norm()
    }

    pub fn return_gap(&self) -> f64 {
        (self.return_chain - self.return_green).norm()
    }
}

/// Taylor coefficients in `ε` of both generating functions at `z = 1 + ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingMoments {
    pub x1: f64,
    pub x2: f64,
    pub y1: f64,
    pub y2: f64,
    pub y3: f64,
}

fn check(g: &Graph, v: usize, vp: usize) -> Result<()> {
    if g.is_directed() {
        return Err(Error::invalid(
            "crossing generating functions need symmetric conductances",
        ));
    }
    if v >= g.n() || vp >= g.n() {
        return Err(Error::invalid("vertex out of range"));
    }
    if !g.is_connected() {
        return Err(Error::invalid("graph must be connected"));
    }
    Ok(())
}

/// Transition weights `P(v, v2) φ_{v v2}` for every dart out of `v`.
fn steps(g: &Graph, darts: &[DirEdge], z: C64) -> Vec<Vec<(usize, C64)>> {
    let conn = LineConnection::with_darts(g.m(), darts, z);
    let mut out = vec![Vec::new(); g.n()];
    for (e, edge) in g.edges().iter().enumerate() {
        let phi = conn.get(e);
        out[edge.tail].push((edge.head, phi * edge.conductance));
        out[edge.head].push((edge.tail, phi.inv() * edge.conductance));
    }
    for (v, list) in out.iter_mut().enumerate() {
        let deg = g.weighted_degree(v);
        for s in list.iter_mut() {
            s.1 /= deg;
        }
    }
    out
}

/// Hitting generating function `h(u) = E_u[z^k; hit vp]` for every `u`,
/// from `(I - N) h = a` on the vertices other than `vp`.
fn hitting(g: &Graph, darts: &[DirEdge], vp: usize, z: C64) -> Result<Vec<C64>> {
    let st = steps(g, darts, z);
    let rest: Vec<usize> = (0..g.n()).filter(|&u| u != vp).collect();
    let mut index = vec![usize::MAX; g.n()];
    for (i, &u) in rest.iter().enumerate() {
        index[u] = i;
    }
    let k = rest.len();
    let mut m = CMatrix::identity(k);
    let mut a = vec![C64::new(0.0, 0.0); k];
    for (i, &u) in rest.iter().enumerate() {
        for &(t, w) in &st[u] {
            if t == vp {
                a[i] += w;
            } else {
                m[(i, index[t])] -= w;
            }
        }
    }
    let lu = m.lu()?;
    if lu.is_singular() {
        return Err(Error::Singular {
            pivot: lu.min_pivot(),
        });
    }
    let sol = lu.solve(&a)?;
    let mut h = vec![C64::new(1.0, 0.0); g.n()];
    for (i, &u) in rest.iter().enumerate() {
        h[u] = sol[i];
    }
    Ok(h)
}

/// Absorbing-chain side only: `(walk v → vp, excursion from vp)`. Defined
/// even where `Δ(z)` is singular, e.g. for an empty zipper.
pub fn walk_pgf(g: &Graph, darts: &[DirEdge], v: usize, vp: usize, z: C64) -> Result<(C64, C64)> {
    check(g, v, vp)?;
    let h = hitting(g, darts, vp, z)?;
    Ok((
        h[v],
        steps(g, darts, z)[vp].iter().map(|&(t, w)| w * h[t]).sum(),
    ))
}

/// Generating functions of the signed number of crossings of `darts`: the
/// walk from `v` stopped at `vp`, and the excursion from `vp`.
pub fn crossing_pgf(
    g: &Graph,
    darts: &[DirEdge],
    v: usize,
    vp: usize,
    z: C64,
) -> Result<CrossingPgf> {
    let (walk_chain, return_chain) = walk_pgf(g, darts, v, vp, z)?;
    let lap = BundleLaplacian::line(
        g,
        &LineConnection::with_darts(g.m(), darts, z),
        Variant::Weighted,
    )?;
    let green = lap.green()?;
    let gvv = green[(vp, vp)];
    Ok(CrossingPgf {
        z,
        walk_chain,
        walk_green: green[(v, vp)] / gvv,
        return_chain,
        return_green: 1.0 - 1.0 / (gvv * g.weighted_degree(vp)),
    })
}

/// `X1, X2, Y1, Y2, Y3` by Cauchy integrals of the absorbing-chain side on a
/// circle around `z = 1`.
pub fn crossing_moments(
    g: &Graph,
    darts: &[DirEdge],
    v: usize,
    vp: usize,
) -> Result<CrossingMoments> {
    check(g, v, vp)?;
    let one = C64::new(1.0, 0.0);
    let x = contour_taylor(
        |z| Ok(hitting(g, darts, vp, z)?[v]),
        one,
        CONTOUR_RADIUS,
        CONTOUR_POINTS,
        2,
    )?;
    let y = contour_taylor(
        |z| {
            let h = hitting(g, darts, vp, z)?;
            Ok(steps(g, darts, z)[vp].iter().map(|&(t, w)| w * h[t]).sum())
        },
        one,
        CONTOUR_RADIUS,
        CONTOUR_POINTS,
        3,
    )?;
    Ok(CrossingMoments {
        x1: x[1].re,
        x2: x[2].re,
        y1: y[1].re,
        y2: y[2].re,
        y3: y[3].re,
    })
}

/// Expected signed crossings of the walk `v → vp`, as a current flow.
pub fn transfer_current_crossings(
    g: &Graph,
    darts: &[DirEdge],
    v: usize,
    vp: usize,
) -> Result<f64> {
    check(g, v, vp)?;
    current_crossings(g, darts, v, vp)
}

/// Comparison of `det Δ(1 + ε)` with its second-order expansion.
#[derive(Debug, Clone)]
pub struct DetExpansion {
    pub kappa: f64,
    pub degree: f64,
    pub y2: f64,
    pub y3: f64,
    /// `(ε, det Δ(1+ε), κ deg (-Y2 ε² + Y2 ε³), |difference| / ε⁴)`.
    pub points: Vec<(f64, f64, f64, f64)>,
}

impl DetExpansion {
    /// Largest ratio between the scaled residuals at different `ε`.
    pub fn residual_spread(&self) -> f64 {
        let r: Vec<f64> = self.points.iter().map(|p| p.3).collect();
        let hi = r.iter().cloned().fold(0.0, f64::max);
        let lo = r.iter().cloned().fold(f64::INFINITY, f64::min);
        hi / lo.max(f64::MIN_POSITIVE)
    }
}

pub fn det_expansion(g: &Graph, darts: &[DirEdge], vp: usize, eps: &[f64]) -> Result<DetExpansion> {
    check(g, vp, vp)?;
    let kappa = tree_count(g)?;
    let degree = g.weighted_degree(vp);
    let m = crossing_moments(g, darts, vp, vp)?;
    let points = eps
        .iter()
        .map(|&e| {
            let lap = BundleLaplacian::line(
                g,
                &LineConnection::with_darts(g.m(), darts, C64::new(1.0 + e, 0.0)),
                Variant::Weighted,
            )?;
            let det = lap.det()?.re;
            let predicted = kappa * degree * m.y2 * (e.powi(3) - e * e);
            Ok((e, det, predicted, (det - predicted).abs() / e.powi(4)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DetExpansion {
        kappa,
        degree,
        y2: m.y2,
        y3: m.y3,
        points,
    })
}

/// `d/dz log det Δ(z)` from the Green's function and from a central finite
/// difference.
#[derive(Debug, Clone, Copy)]
pub struct LogDerivative {
    pub z: C64,
    pub trace: C64,
    pub finite_difference: C64,
}

pub fn log_derivative(g: &Graph, darts: &[DirEdge], z: C64, h: f64) -> Result<LogDerivative> {
    check(g, 0, 0)?;
    let lap = |z: C64| {
        BundleLaplacian::line(
            g,
            &LineConnection::with_darts(g.m(), darts, z),
            Variant::Weighted,
        )
    };
    let green = lap(z)?.green()?;
    // Δ[u][w] = -c z and Δ[w][u] = -c / z along each zipper dart u → w.
    let trace = darts
        .iter()
        .map(|&d| {
            let (u, w) = (g.src(d), g.dst(d));
            let c = g.edge(d.edge).conductance;
            green[(u, w)] * c / (z * z) - green[(w, u)] * c
        })
        .sum();
    let step = C64::new(h, 0.0);
    let up = lap(z + step)?.lu().log_det();
    let down = lap(z - step)?.lu().log_det();
    let finite_difference = (log_value(up) - log_value(down)) / (2.0 * h);
    Ok(LogDerivative {
        z,
        trace,
        finite_difference,
    })
}

/// Complex logarithm from `(ln |det|, phase)`; the branch cut is irrelevant
/// for nearby arguments away from it.
fn log_value((modulus, phase): (f64, C64)) -> C64 {
    C64::new(modulus, phase.arg())
}
