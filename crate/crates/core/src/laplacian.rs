//! Bundle Laplacians `Δ = d* C d` and their derived operators.
//!
//! Matrix entries follow `Δ[v][v] = Σ_{v'} c_{vv'}` and `Δ[v][v'] = -c_{vv'} φ_{vv'}`,
//! summed over parallel edges. For SL₂ connections the same formula holds
//! blockwise and the matrix is realized as `2n × 2n`.

use std::sync::OnceLock;

use crate::connection::{LineConnection, Sl2Connection};
use crate::error::{Error, Result};
use crate::graph::{Digraph, Graph};
use crate::linalg::{CMatrix, Lu, Mat2, SelfDualMatrix, C64};
use crate::tolerance::Tolerances;

/// Which weights the Laplacian uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// All conductances taken to be 1.
    Standard,
    /// Symmetric conductances from the graph; asymmetric graphs are rejected.
    Weighted,
    /// Per-direction weights `c_{vv'} ≠ c_{v'v}`.
    Directed,
    /// Per-direction weights restricted to the vertices outside the boundary set.
    Dirichlet,
}

#[derive(Debug, Clone)]
enum Coeff {
    Line(LineConnection),
    Sl2,
}

/// An assembled Laplacian with a lazily computed LU factorization.
#[derive(Debug, Clone)]
pub struct BundleLaplacian {
    graph: Graph,
    coeff: Coeff,
    variant: Variant,
    /// Vertices indexing the rows, in increasing order.
    vertices: Vec<usize>,
    matrix: CMatrix,
    tol: Tolerances,
    lu: OnceLock<Lu>,
}

fn weights(g: &Graph, variant: Variant, e: usize) -> (f64, f64) {
    let edge = g.edge(e);
    match variant {
        Variant::Standard => (1.0, 1.0),
        Variant::Weighted => (edge.conductance, edge.conductance),
        Variant::Directed | Variant::Dirichlet => (edge.forward_weight(), edge.backward_weight()),
    }
}

fn kept_vertices(g: &Graph, variant: Variant) -> Result<Vec<usize>> {
    if variant == Variant::Weighted && g.is_directed() {
        return Err(Error::invalid(
            "weighted variant needs symmetric conductances; use the directed variant",
        ));
    }
    if variant == Variant::Dirichlet {
        if g.boundary().is_empty() {
            return Err(Error::invalid(
                "Dirichlet variant needs a nonempty boundary set",
            ));
        }
        Ok((0..g.n()).filter(|v| !g.boundary().contains(v)).collect())
    } else {
        Ok((0..g.n()).collect())
    }
}

impl BundleLaplacian {
    pub fn line(g: &Graph, conn: &LineConnection, variant: Variant) -> Result<Self> {
        Self::line_with(g, conn, variant, Tolerances::DEFAULT)
    }

    pub fn line_with(
        g: &Graph,
        conn: &LineConnection,
        variant: Variant,
        tol: Tolerances,
    ) -> Result<Self> {
        if conn.len() != g.m() {
            return Err(Error::invalid(format!(
                "connection has {} transports for {} edges",
                conn.len(),
                g.m()
            )));
        }
        let vertices = kept_vertices(g, variant)?;
        let mut full = CMatrix::zeros(g.n(), g.n());
        for (e, edge) in g.edges().iter().enumerate() {
            let (cf, cb) = weights(g, variant, e);
            let phi = conn.get(e);
            let (t, h) = (edge.tail, edge.head);
            full[(t, t)] += cf;
            full[(h, h)] += cb;
            full[(t, h)] -= phi * cf;
            // Unit transports are inverted by conjugation so Δ is exactly Hermitian.
            let back = if (phi.norm() - 1.0).abs() <= tol.unitary {
                phi.conj()
            } else {
                phi.inv()
            };
            full[(h, t)] -= back * cb;
        }
        let matrix = full.principal(&vertices);
        Ok(BundleLaplacian {
            graph: g.clone(),
            coeff: Coeff::Line(conn.clone()),
            variant,
            vertices,
            matrix,
            tol,
            lu: OnceLock::new(),
        })
    }

    pub fn sl2(g: &Graph, conn: &Sl2Connection, variant: Variant) -> Result<Self> {
        Self::sl2_with(g, conn, variant, Tolerances::DEFAULT)
    }

    pub fn sl2_with(
        g: &Graph,
        conn: &Sl2Connection,
        variant: Variant,
        tol: Tolerances,
    ) -> Result<Self> {
        if conn.len() != g.m() {
            return Err(Error::invalid(format!(
                "connection has {} transports for {} edges",
                conn.len(),
                g.m()
            )));
        }
        if matches!(variant, Variant::Directed)
            || (variant == Variant::Dirichlet && g.is_directed())
        {
            return Err(Error::invalid(
                "SL2 Laplacians need symmetric conductances to be self-dual",
            ));
        }
        let vertices = kept_vertices(g, variant)?;
        let mut blocks = SelfDualMatrix::zeros(g.n());
        for (e, edge) in g.edges().iter().enumerate() {
            let (c, _) = weights(g, variant, e);
            let c = C64::new(c, 0.0);
            let phi = conn.get(e);
            let (t, h) = (edge.tail, edge.head);
            blocks.add_to(t, t, Mat2::scalar(c));
            blocks.add_to(h, h, Mat2::scalar(c));
            blocks.add_to(t, h, -phi.scale(c));
            blocks.add_to(h, t, -phi.adj().scale(c));
        }
        let matrix = blocks.principal(&vertices).realize();
        Ok(BundleLaplacian {
            graph: g.clone(),
            coeff: Coeff::Sl2,
            variant,
            vertices,
            matrix,
            tol,
            lu: OnceLock::new(),
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// Vertices indexing the rows (all vertices except for the Dirichlet variant).
    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    /// Fiber dimension: 1 for line bundles, 2 for SL₂.
    pub fn rank(&self) -> usize {
        match self.coeff {
            Coeff::Line(_) => 1,
            Coeff::Sl2 => 2,
        }
    }

    pub fn line_connection(&self) -> Option<&LineConnection> {
        match &self.coeff {
            Coeff::Line(c) => Some(c),
            Coeff::Sl2 => None,
        }
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn lu(&self) -> &Lu {
        self.lu
            .get_or_init(|| self.matrix.lu_with(&self.tol).expect("Laplacian is square"))
    }

    /// Block view of an SL₂ Laplacian.
    pub fn self_dual(&self) -> Option<SelfDualMatrix> {
        match self.coeff {
            Coeff::Sl2 => SelfDualMatrix::from_realized(&self.matrix).ok(),
            Coeff::Line(_) => None,
        }
    }

    /// `det Δ` for line bundles, `Qdet Δ` for SL₂.
    pub fn det(&self) -> Result<C64> {
        match self.coeff {
            Coeff::Line(_) => Ok(self.lu().det()),
            Coeff::Sl2 => self.self_dual().unwrap().qdet_with(&self.tol),
        }
    }

    /// Green's function `Δ⁻¹`, refused when singular or ill-conditioned.
    pub fn green(&self) -> Result<CMatrix> {
        let g = self.lu().guarded_inverse(self.tol.condition)?;
        let residual = (&(&self.matrix * &g) - &CMatrix::identity(self.matrix.rows())).norm_inf()
            / (self.matrix.norm_inf() * g.norm_inf()).max(1.0);
        if residual > self.tol.green_residual {
            return Err(Error::Numerical(format!(
                "Green's function residual {residual:.3e}"
            )));
        }
        Ok(g)
    }

    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>> {
        self.lu().solve(b)
    }

    /// Coboundary `d`: row `e` has `-1` at the tail and `φ_e` at the head
    /// (line bundles, full vertex set).
    pub fn incidence(&self) -> Result<CMatrix> {
        let conn = self.line_only()?;
        let g = &self.graph;
        let col: Vec<Option<usize>> = {
            let mut map = vec![None; g.n()];
            for (i, &v) in self.vertices.iter().enumerate() {
                map[v] = Some(i);
            }
            map
        };
        let mut d = CMatrix::zeros(g.m(), self.vertices.len());
        for (e, edge) in g.edges().iter().enumerate() {
            if let Some(i) = col[edge.tail] {
                d[(e, i)] = C64::new(-1.0, 0.0);
            }
            if let Some(j) = col[edge.head] {
                d[(e, j)] = conn.get(e);
            }
        }
        Ok(d)
    }

    /// Adjoint coboundary `d*`: column `e` has `-1` at the tail and `φ_e⁻¹` at the head.
    pub fn coincidence(&self) -> Result<CMatrix> {
        let conn = self.line_only()?;
        let d = self.incidence()?;
        let mut ds = d.transpose();
        for (e, edge) in self.graph.edges().iter().enumerate() {
            if let Some(j) = self.vertices.iter().position(|&v| v == edge.head) {
                let phi = conn.get(e);
                ds[(j, e)] = if (phi.norm() - 1.0).abs() <= self.tol.unitary {
                    phi.conj()
                } else {
                    phi.inv()
                };
            }
        }
        Ok(ds)
    }

    /// Diagonal conductances `C` (symmetric variants only).
    pub fn conductances(&self) -> Result<Vec<f64>> {
        if matches!(self.variant, Variant::Directed)
            || self.graph.is_directed() && self.variant != Variant::Standard
        {
            return Err(Error::invalid(
                "transfer current needs symmetric conductances",
            ));
        }
        Ok((0..self.graph.m())
            .map(|e| weights(&self.graph, self.variant, e).0)
            .collect())
    }

    /// Transfer current `C^{1/2} d Δ⁻¹ d* C^{1/2}`, the projection onto
    /// (weighted) exact forms.
    pub fn transfer_current(&self) -> Result<CMatrix> {
        let c = self.conductances()?;
        let sqrt_c: Vec<C64> = c.iter().map(|x| C64::new(x.sqrt(), 0.0)).collect();
        let s = CMatrix::diagonal(&sqrt_c);
        let d = self.incidence()?;
        let ds = self.coincidence()?;
        let g = self.green()?;
        let left = &s * &d;
        let right = &ds * &s;
        Ok(&(&left * &g) * &right)
    }

    fn line_only(&self) -> Result<&LineConnection> {
        self.line_connection()
            .ok_or_else(|| Error::invalid("operation is only defined for line bundles"))
    }
}

/// Matrix of the directed Laplacian of a digraph with per-arc transports:
/// `Δ[v][v] = Σ_{arcs out of v} c`, `Δ[t][h] -= c φ`. Self-loops contribute
/// `c (1 - φ)` to the diagonal.
pub fn directed_matrix(d: &Digraph, transports: &[C64]) -> Result<CMatrix> {
    if transports.len() != d.arcs().len() {
        return Err(Error::Dimension {
            expected: d.arcs().len(),
            actual: transports.len(),
        });
    }
    let mut m = CMatrix::zeros(d.n(), d.n());
    for (a, &phi) in d.arcs().iter().zip(transports) {
        m[(a.tail, a.tail)] += a.weight;
        m[(a.tail, a.head)] -= phi * a.weight;
    }
    Ok(m)
}

/// Weighted spanning-tree count `κ`, as the determinant of the trivial
/// Laplacian with the row and column of vertex 0 removed.
pub fn tree_count(g: &Graph) -> Result<f64> {
    let lap = BundleLaplacian::line(g, &LineConnection::trivial(g.m()), natural_variant(g))?;
    let rest: Vec<usize> = (1..g.n()).collect();
    Ok(lap.matrix().principal(&rest).det()?.re)
}

/// Product of the nonzero eigenvalues of the trivial Laplacian, `n · κ`.
pub fn det_prime(g: &Graph) -> Result<f64> {
    Ok(g.n() as f64 * tree_count(g)?)
}

/// The natural variant for a graph: weighted if symmetric, directed otherwise.
pub fn natural_variant(g: &Graph) -> Variant {
    if g.is_directed() {
        Variant::Directed
    } else {
        Variant::Weighted
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{cycle, cylinder};
    use crate::linalg::rel_err;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn k3(z12: C64, z23: C64, z13: C64) -> BundleLaplacian {
        let g = Graph::unit(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        BundleLaplacian::line(
            &g,
            &LineConnection::new(vec![z12, z23, z13]).unwrap(),
            Variant::Standard,
        )
        .unwrap()
    }

    #[test]
    fn k3_matrix_layout() {
        let (z12, z23, z13) = (C64::new(0.6, 0.8), C64::new(0.0, 1.0), C64::new(-0.8, 0.6));
        let m = k3(z12, z23, z13).matrix().clone();
        let two = C64::new(2.0, 0.0);
        let want = CMatrix::from_rows(&[
            vec![two, -z12, -z13],
            vec![-z12.inv(), two, -z23],
            vec![-z13.inv(), -z23.inv(), two],
        ]);
        assert!((&m - &want).max_abs() < 1e-15);
    }

    #[test]
    fn k3_with_all_i() {
        let i = C64::new(0.0, 1.0);
        let det = k3(i, i, i).det().unwrap();
        let w = i * i / i;
        assert!((det - (2.0 - w - w.inv())).norm() < 1e-14);
        assert!((det - 2.0).norm() < 1e-14);
    }

    #[test]
    fn trivial_connection_gives_graph_laplacian() {
        let g = Graph::unit(4, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]).unwrap();
        let lap =
            BundleLaplacian::line(&g, &LineConnection::trivial(5), Variant::Standard).unwrap();
        for v in 0..4 {
            assert_eq!(lap.matrix()[(v, v)].re, g.degree(v) as f64);
        }
        assert_eq!(lap.matrix()[(1, 3)], C64::new(0.0, 0.0));
        assert_eq!(lap.det().unwrap(), C64::new(0.0, 0.0));
        assert!(matches!(
            lap.green(),
            Err(Error::Singular { .. }) | Err(Error::IllConditioned { .. })
        ));
    }

    #[test]
    fn dirichlet_path() {
        let g = Graph::unit(3, &[(0, 1), (1, 2)])
            .unwrap()
            .with_boundary(vec![0])
            .unwrap();
        let lap =
            BundleLaplacian::line(&g, &LineConnection::trivial(2), Variant::Dirichlet).unwrap();
        let want = CMatrix::from_real(2, 2, &[2.0, -1.0, -1.0, 1.0]);
        assert!((&(lap.matrix().clone()) - &want).max_abs() < 1e-15);
        assert!((lap.det().unwrap() - 1.0).norm() < 1e-15);
    }

    #[test]
    fn dirichlet_green_is_killed_walk_series() {
        let g = Graph::unit(4, &[(0, 1), (1, 2), (2, 3), (1, 3)])
            .unwrap()
            .with_boundary(vec![0])
            .unwrap();
        let lap =
            BundleLaplacian::line(&g, &LineConnection::trivial(4), Variant::Dirichlet).unwrap();
        let green = lap.green().unwrap();
        // G = (D - A)^{-1} = Σ_k (D^{-1}A)^k D^{-1} on the interior.
        let inner = lap.vertices().to_vec();
        let deg: Vec<f64> = inner.iter().map(|&v| g.degree(v) as f64).collect();
        let n = inner.len();
        let step = CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(0.0, 0.0)
            } else {
                -lap.matrix()[(i, j)] / deg[i]
            }
        });
        let dinv = CMatrix::diagonal(
            &deg.iter()
                .map(|d| C64::new(1.0 / d, 0.0))
                .collect::<Vec<_>>(),
        );
        let mut term = dinv.clone();
        let mut sum = CMatrix::zeros(n, n);
        for _ in 0..400 {
            sum = &sum + &term;
            term = &step * &term;
        }
        assert!((&sum - &green).max_abs() < 1e-10);
    }

    #[test]
    fn cycle_with_monodromy_minus_one() {
        let p = cycle(4).unwrap();
        let conn = LineConnection::with_darts(4, &p.generators[0].darts, C64::new(-1.0, 0.0));
        let lap = BundleLaplacian::line(&p.graph, &conn, Variant::Standard).unwrap();
        let g = lap.green().unwrap();
        assert!((&(lap.matrix() * &g) - &CMatrix::identity(4)).norm_inf() < 1e-10);
        assert!((lap.det().unwrap() - 4.0).norm() < 1e-12);
    }

    #[test]
    fn cycle_determinant_closed_form() {
        for n in [3, 5, 8] {
            let p = cycle(n).unwrap();
            let z = C64::from_polar(1.0, 0.9);
            let conn = LineConnection::with_darts(n, &p.generators[0].darts, z);
            let det = BundleLaplacian::line(&p.graph, &conn, Variant::Standard)
                .unwrap()
                .det()
                .unwrap();
            assert!(rel_err(det, 2.0 - z - z.inv(), 1e-12) < 1e-12);
        }
    }

    #[test]
    fn single_edge_unitary_is_singular() {
        let g = Graph::unit(2, &[(0, 1)]).unwrap();
        let conn = LineConnection::new(vec![C64::from_polar(1.0, 1.2)]).unwrap();
        let det = BundleLaplacian::line(&g, &conn, Variant::Standard)
            .unwrap()
            .det()
            .unwrap();
        assert!(det.norm() < 1e-14);
    }

    #[test]
    fn unitary_laplacian_is_hermitian_and_factorises() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let p = cylinder(3, 4).unwrap();
        let mut g = p.graph.clone();
        let mut weighted = Graph::new(g.n());
        for e in g.edges() {
            weighted
                .add_edge(e.tail, e.head, rng.random_range(0.5..2.0))
                .unwrap();
        }
        g = weighted;
        let conn = LineConnection::random_unitary(g.m(), &mut rng);
        let lap = BundleLaplacian::line(&g, &conn, Variant::Weighted).unwrap();
        let m = lap.matrix();
        assert_eq!((m - &m.adjoint()).max_abs(), 0.0);
        let c: Vec<C64> = lap
            .conductances()
            .unwrap()
            .into_iter()
            .map(|x| C64::new(x, 0.0))
            .collect();
        let rebuilt =
            &(&lap.coincidence().unwrap() * &CMatrix::diagonal(&c)) * &lap.incidence().unwrap();
        assert!((&rebuilt - m).max_abs() < 1e-13);
    }

    #[test]
    fn transfer_current_is_a_projection() {
        let p = cylinder(3, 3).unwrap();
        let z = C64::from_polar(1.0, std::f64::consts::PI / 3.0);
        let conn = LineConnection::with_darts(p.graph.m(), &p.generators[0].darts, z);
        let lap = BundleLaplacian::line(&p.graph, &conn, Variant::Standard).unwrap();
        let k = lap.transfer_current().unwrap();
        assert!((&(&k * &k) - &k).max_abs() < 1e-8);
        assert!((k.trace() - 9.0).norm() < 1e-9);
        assert!((&k - &k.adjoint()).max_abs() < 1e-12);
        let f: Vec<C64> = (0..9)
            .map(|i| C64::new(i as f64 * 0.3 - 1.0, 0.1 * i as f64))
            .collect();
        let df = lap.incidence().unwrap().mul_vec(&f);
        let pdf = k.mul_vec(&df);
        assert!(df.iter().zip(&pdf).all(|(a, b)| (a - b).norm() < 1e-10));
    }

    #[test]
    fn qdet_squared_is_realized_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let g = Graph::unit(4, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]).unwrap();
        let sl2 = Sl2Connection::random(5, 0.3, &mut rng);
        let lap = BundleLaplacian::sl2(&g, &sl2, Variant::Standard).unwrap();
        let q = lap.det().unwrap();
        let d = lap.lu().det();
        assert!(rel_err(q * q, d, 1e-12) < 1e-9);
    }
}
