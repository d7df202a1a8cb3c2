//! Exact sampling from the determinantal CRSF measure of a unitary line bundle.
//!
//! The edge set of a CRSF drawn with probability proportional to
//! `∏ c_e ∏_cycles (2 - w - 1/w)` is determinantal with kernel the transfer
//! current `K`. Edges are decided one at a time in canonical order; each
//! decision conditions the kernel by a rank-one Schur update.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::connection::LineConnection;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::laplacian::{natural_variant, BundleLaplacian, Variant};
use crate::linalg::{CMatrix, C64};
use crate::oracle::{enumerate_crsfs, Crsf};
use crate::par::*;
use crate::tolerance::Tolerances;

/// The transfer-current kernel of a unitary line-bundle Laplacian.
#[derive(Debug, Clone)]
pub struct Kernel {
    graph: Graph,
    conn: LineConnection,
    roots: Vec<usize>,
    matrix: CMatrix,
    tol: Tolerances,
}

impl Kernel {
    pub fn new(lap: &BundleLaplacian) -> Result<Self> {
        let conn = lap
            .line_connection()
            .ok_or_else(|| Error::invalid("sampling is only implemented for line bundles"))?;
        conn.require_unitary(lap.tolerances())?;
        let roots = if lap.variant() == Variant::Dirichlet {
            lap.graph().boundary().to_vec()
        } else {
            Vec::new()
        };
        Ok(Kernel {
            graph: lap.graph().clone(),
            conn: conn.clone(),
            roots,
            matrix: lap.transfer_current()?,
            tol: *lap.tolerances(),
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    /// `Pr(e present) = K(e, e)`.
    pub fn marginal(&self, e: usize) -> f64 {
        self.matrix[(e, e)].re
    }

    /// `Pr(e and f present)`, the 2×2 principal minor.
    pub fn pair(&self, e: usize, f: usize) -> f64 {
        self.matrix
            .principal(&[e, f])
            .det()
            .map(|d| d.re)
            .unwrap_or(0.0)
    }

    /// Probability of exactly the edge set `x`: `(-1)^{m-|X|} det(K - diag(1 - X))`.
    pub fn point_probability(&self, x: &[bool]) -> Result<f64> {
        point_probability(&self.matrix, x)
    }

    /// The kernel conditioned on `e` being present or absent. Row and column
    /// `e` are left in place and should be ignored.
    pub fn conditioned(&self, e: usize, present: bool) -> Result<CMatrix> {
        let mut k = self.matrix.clone();
        let m = k.rows();
        let pivot = if present { k[(e, e)] } else { k[(e, e)] - 1.0 };
        if pivot.norm() <= self.tol.pivot {
            return Err(Error::Singular {
                pivot: pivot.norm(),
            });
        }
        let col = k.column(e);
        let row = k.row(e).to_vec();
        for j in (0..m).filter(|&j| j != e) {
            for l in (0..m).filter(|&l| l != e) {
                k[(j, l)] -= col[j] * row[l] / pivot;
            }
        }
        Ok(k)
    }

    pub fn state(&self, seed: u64) -> DeterminantalState {
        DeterminantalState::new(self, ChaCha8Rng::seed_from_u64(seed), seed)
    }

    pub fn sample(&self, seed: u64) -> Result<Sample> {
        self.state(seed).run()
    }

    /// `count` independent samples; run `i` uses stream `i` of the seed's generator.
    pub fn sample_many(&self, seed: u64, count: usize) -> Result<Vec<Sample>> {
        (0..count)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                DeterminantalState::new(self, rng, seed).run()
            })
            .collect()
    }
}

/// `(-1)^{m-|X|} det(K - diag(1 - X))` for an `m × m` kernel.
pub fn point_probability(k: &CMatrix, x: &[bool]) -> Result<f64> {
    let m = k.rows();
    if x.len() != m {
        return Err(Error::Dimension {
            expected: m,
            actual: x.len(),
        });
    }
    let mut a = k.clone();
    let mut absent = 0;
    for (i, &xi) in x.iter().enumerate() {
        if !xi {
            a[(i, i)] -= 1.0;
            absent += 1;
        }
    }
    let det = a.det()?;
    Ok(if absent % 2 == 0 { det.re } else { -det.re })
}

/// A sampling run in progress.
#[derive(Debug, Clone)]
pub struct DeterminantalState {
    kernel: CMatrix,
    decided: Vec<Option<bool>>,
    rng: ChaCha8Rng,
    seed: u64,
    tol: Tolerances,
    graph: Graph,
    conn: LineConnection,
    roots: Vec<usize>,
}

impl DeterminantalState {
    fn new(k: &Kernel, rng: ChaCha8Rng, seed: u64) -> Self {
        DeterminantalState {
            kernel: k.matrix.clone(),
            decided: vec![None; k.matrix.rows()],
            rng,
            seed,
            tol: k.tol,
            graph: k.graph.clone(),
            conn: k.conn.clone(),
            roots: k.roots.clone(),
        }
    }

    pub fn decided(&self) -> &[Option<bool>] {
        &self.decided
    }

    /// Decides the next undecided edge; returns `None` when all are decided.
    pub fn step(&mut self) -> Result<Option<(usize, bool)>> {
        let Some(e) = self.decided.iter().position(Option::is_none) else {
            return Ok(None);
        };
        let p = self.kernel[(e, e)].re;
        if p < -self.tol.kernel_fail || p > 1.0 + self.tol.kernel_fail {
            return Err(Error::Numerical(format!(
                "conditional kernel diagonal {p:.3e} at edge {e}"
            )));
        }
        let p = p.clamp(0.0, 1.0);
        let present = self.rng.random::<f64>() < p;
        self.decided[e] = Some(present);
        let pivot = if present {
            self.kernel[(e, e)]
        } else {
            self.kernel[(e, e)] - 1.0
        };
        let open: Vec<usize> = (0..self.decided.len())
            .filter(|&j| self.decided[j].is_none())
            .collect();
        if pivot.norm() > 0.0 {
            let col: Vec<C64> = open.iter().map(|&j| self.kernel[(j, e)] / pivot).collect();
            let row: Vec<C64> = open.iter().map(|&l| self.kernel[(e, l)]).collect();
            for (a, &j) in open.iter().enumerate() {
                for (b, &l) in open.iter().enumerate() {
                    self.kernel[(j, l)] -= col[a] * row[b];
                }
            }
        }
        Ok(Some((e, present)))
    }

    pub fn run(mut self) -> Result<Sample> {
        while self.step()?.is_some() {}
        let edges: Vec<usize> = (0..self.decided.len())
            .filter(|&e| self.decided[e] == Some(true))
            .collect();
        let crsf = Crsf::from_edges(&self.graph, &edges, &self.roots)
            .ok_or_else(|| Error::Numerical(format!("sampled edge set {edges:?} is not a CRSF")))?;
        let monodromies = crsf.monodromies(&self.conn);
        Ok(Sample {
            seed: self.seed,
            crsf,
            monodromies,
        })
    }
}

/// One sampled CRSF.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub seed: u64,
    pub crsf: Crsf,
    pub monodromies: Vec<C64>,
}

impl fmt::Display for Sample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "seed: {}", self.seed)?;
        writeln!(f, "components: {}", self.crsf.components.len())?;
        writeln!(f, "cycles: {}", self.crsf.cycles.len())?;
        for (i, w) in self.monodromies.iter().enumerate() {
            writeln!(f, "monodromy {i}: {:.12e} {:+.12e}i", w.re, w.im)?;
        }
        for e in &self.crsf.edges {
            writeln!(f, "{e}")?;
        }
        Ok(())
    }
}

/// Sample with seed `seed` from the CRSF measure of `lap`.
pub fn sample(lap: &BundleLaplacian, seed: u64) -> Result<Sample> {
    Kernel::new(lap)?.sample(seed)
}

/// Limit, as the connection shrinks to the identity, of the CRSF measure
/// with transports `e^{i t c_e}`.
#[derive(Debug, Clone)]
pub struct SmallMonodromy {
    /// The single-component CRSFs, in enumeration order.
    pub crts: Vec<Crsf>,
    /// `(Σ_cycle c)² ∏ c_e`, normalized.
    pub limit: Vec<f64>,
    /// Determinantal probabilities at `t`.
    pub finite: Vec<f64>,
    /// Richardson extrapolation to `t = 0` from `t` and `t/2`.
    pub extrapolated: Vec<f64>,
    pub t: f64,
}

impl SmallMonodromy {
    pub fn total_variation(&self, which: &[f64]) -> f64 {
        // Mass off the CRTs counts fully.
        let on: f64 = which.iter().sum();
        0.5 * (self
            .limit
            .iter()
            .zip(which)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            + (1.0 - on).abs())
    }
}

fn signed_cycle_sum(c: &[f64], crt: &Crsf) -> f64 {
    crt.cycles[0]
        .iter()
        .map(|d| if d.forward { c[d.edge] } else { -c[d.edge] })
        .sum()
}

pub fn small_monodromy_measure(g: &Graph, c: &[f64], t: f64) -> Result<SmallMonodromy> {
    if c.len() != g.m() {
        return Err(Error::Dimension {
            expected: g.m(),
            actual: c.len(),
        });
    }
    if !(t > 0.0) {
        return Err(Error::invalid("t must be positive"));
    }
    let variant = natural_variant(g);
    let crts: Vec<Crsf> = enumerate_crsfs(g)?
        .into_iter()
        .filter(|f| f.components.len() == 1)
        .collect();
    let raw: Vec<f64> = crts
        .iter()
        .map(|f| {
            signed_cycle_sum(c, f).powi(2)
                * f.edges
                    .iter()
                    .map(|&e| g.edge(e).conductance)
                    .product::<f64>()
        })
        .collect();
    let z: f64 = raw.iter().sum();
    if z <= 0.0 {
        return Err(Error::invalid(
            "every cycle sum vanishes; the limit measure is undefined",
        ));
    }
    let limit = raw.iter().map(|r| r / z).collect();
    let at = |s: f64| -> Result<Vec<f64>> {
        let conn = LineConnection::new(c.iter().map(|&ci| C64::from_polar(1.0, s * ci)).collect())?;
        let k = Kernel::new(&BundleLaplacian::line(g, &conn, variant)?)?;
        crts.iter()
            .map(|f| {
                let mut x = vec![false; g.m()];
                for &e in &f.edges {
                    x[e] = true;
                }
                k.point_probability(&x)
            })
            .collect()
    };
    let finite = at(t)?;
    let half = at(t / 2.0)?;
    let extrapolated = finite
        .iter()
        .zip(&half)
        .map(|(a, b)| (4.0 * b - a) / 3.0)
        .collect();
    Ok(SmallMonodromy {
        crts,
        limit,
        finite,
        extrapolated,
        t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{cycle, cylinder};

    fn kernel(g: &Graph, conn: &LineConnection) -> Kernel {
        Kernel::new(&BundleLaplacian::line(g, conn, Variant::Standard).unwrap()).unwrap()
    }

    #[test]
    fn kernel_is_a_projection() {
        let p = cylinder(3, 3).unwrap();
        let conn =
            LineConnection::with_darts(p.graph.m(), &p.generators[0].darts, C64::new(-1.0, 0.0));
        let k = kernel(&p.graph, &conn);
        let k2 = k.matrix() * k.matrix();
        assert!((&k2 - k.matrix()).max_abs() < 1e-12);
        let tr = k.matrix().trace();
        assert!((tr.re - 9.0).abs() < 1e-10 && tr.im.abs() < 1e-12);
    }

    #[test]
    fn single_cycle_is_forced() {
        let p = cycle(5).unwrap();
        let conn = LineConnection::with_darts(5, &p.generators[0].darts, C64::from_polar(1.0, 1.0));
        let k = kernel(&p.graph, &conn);
        for seed in 0..5 {
            assert_eq!(k.sample(seed).unwrap().crsf.edges, vec![0, 1, 2, 3, 4]);
        }
    }

    #[test]
    fn conditioning_is_consistent() {
        let p = cylinder(2, 3).unwrap();
        let conn = LineConnection::with_darts(
            p.graph.m(),
            &p.generators[0].darts,
            C64::from_polar(1.0, 2.0),
        );
        let k = kernel(&p.graph, &conn);
        let (e1, e2) = (0, 4);
        let p1 = k.marginal(e1);
        let given_in = k.conditioned(e1, true).unwrap()[(e2, e2)].re;
        let given_out = k.conditioned(e1, false).unwrap()[(e2, e2)].re;
        assert!((given_in * p1 + given_out * (1.0 - p1) - k.marginal(e2)).abs() < 1e-9);
        assert!((given_in * p1 - k.pair(e1, e2)).abs() < 1e-12);
    }

    #[test]
    fn same_seed_same_sample() {
        let p = cylinder(3, 4).unwrap();
        let conn =
            LineConnection::with_darts(p.graph.m(), &p.generators[0].darts, C64::new(-1.0, 0.0));
        let k = kernel(&p.graph, &conn);
        assert_eq!(k.sample(7).unwrap(), k.sample(7).unwrap());
        assert_eq!(k.sample_many(3, 4).unwrap(), k.sample_many(3, 4).unwrap());
    }

    #[test]
    fn non_unitary_is_rejected() {
        let p = cycle(4).unwrap();
        let conn = LineConnection::with_darts(4, &p.generators[0].darts, C64::new(2.0, 0.0));
        let lap = BundleLaplacian::line(&p.graph, &conn, Variant::Standard).unwrap();
        assert!(Kernel::new(&lap).is_err());
    }

    #[test]
    fn small_monodromy_two_triangles() {
        // Two triangles sharing the edge 0-1: three CRTs, the outer square among them.
        let g = Graph::unit(4, &[(0, 1), (1, 2), (2, 0), (1, 3), (3, 0)]).unwrap();
        let c = [0.0, 1.0, 0.0, 0.0, 3.0];
        let sm = small_monodromy_measure(&g, &c, 1e-3).unwrap();
        assert!(sm.total_variation(&sm.finite) < 1e-2);
        assert!(sm.total_variation(&sm.extrapolated) < 1e-6);
        assert!(small_monodromy_measure(&g, &[0.0; 5], 1e-3).is_err());
    }
}
