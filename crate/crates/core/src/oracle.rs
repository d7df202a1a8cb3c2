//! Brute-force enumerators used as ground truth.
//!
//! Every enumeration is guarded: when the search space exceeds its limit the
//! call fails instead of truncating.

use std::collections::{BTreeMap, HashMap};

use crate::connection::{LineConnection, Sl2Connection};
use crate::error::{Error, Result};
use crate::graph::{directed_torus, Digraph, DirEdge, Graph};
use crate::laplacian::Variant;
use crate::linalg::{Mat2, C64};
use crate::par::*;

/// Limit on the number of edge subsets examined.
pub const SUBSET_LIMIT: f64 = 1e7;
/// Limit on the number of out-edge configurations examined.
pub const CONFIG_LIMIT: f64 = 1e7;
/// Limit on the number of spanning trees enumerated.
pub const TREE_LIMIT: f64 = 1e6;

/// An edge subset in which every component has as many edges as vertices
/// (or, with a boundary set, is a tree meeting it once).
#[derive(Debug, Clone, PartialEq)]
pub struct Crsf {
    /// Sorted canonical edge ids.
    pub edges: Vec<usize>,
    /// Vertex sets of the components, each sorted.
    pub components: Vec<Vec<usize>>,
    /// The unique cycle of each cycle-rooted component, as a closed walk.
    pub cycles: Vec<Vec<DirEdge>>,
}

impl Crsf {
    /// Cycle monodromies for a line connection.
    pub fn monodromies(&self, conn: &LineConnection) -> Vec<C64> {
        self.cycles
            .iter()
            .map(|c| c.iter().map(|&d| conn.along(d)).product())
            .collect()
    }

    pub fn sl2_monodromies(&self, conn: &Sl2Connection) -> Vec<Mat2> {
        self.cycles
            .iter()
            .map(|c| c.iter().fold(Mat2::IDENTITY, |acc, &d| acc * conn.along(d)))
            .collect()
    }

    /// Validates an edge set as an essential CRSF for the root set `roots`
    /// (empty for an ordinary CRSF).
    pub fn from_edges(g: &Graph, edges: &[usize], roots: &[usize]) -> Option<Crsf> {
        let mut is_root = vec![false; g.n()];
        for &v in roots {
            is_root[v] = true;
        }
        let mut sorted = edges.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != edges.len() || sorted.iter().any(|&e| e >= g.m()) {
            return None;
        }
        classify(g, &sorted, &is_root)
    }

    pub fn contains(&self, e: usize) -> bool {
        self.edges.binary_search(&e).is_ok()
    }
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Visits every `k`-subset of `0..m` in lexicographic order, parallel over the
/// smallest element, and keeps the `Some` results in that order.
pub fn combinations<T, F>(m: usize, k: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&[usize]) -> Option<T> + Sync,
{
    if k == 0 {
        return f(&[]).into_iter().collect();
    }
    if k > m {
        return Vec::new();
    }
    let chunks: Vec<Vec<T>> = (0..=m - k)
        .into_par_iter()
        .map(|first| {
            let mut out = Vec::new();
            let mut idx: Vec<usize> = (0..k).map(|i| first + i).collect();
            loop {
                if let Some(t) = f(&idx) {
                    out.push(t);
                }
                // Advance positions 1..k, keeping idx[0] = first.
                let mut i = k;
                loop {
                    if i <= 1 {
                        return out;
                    }
                    i -= 1;
                    if idx[i] < m - k + i {
                        break;
                    }
                }
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
            }
        })
        .collect();
    chunks.into_iter().flatten().collect()
}

struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

/// Structural test for an edge subset: each component must be a tree holding
/// exactly one vertex of `roots`, or hold none and have one cycle.
fn classify(g: &Graph, edges: &[usize], roots: &[bool]) -> Option<Crsf> {
    let n = g.n();
    let mut dsu = Dsu::new(n);
    for &e in edges {
        dsu.union(g.edge(e).tail, g.edge(e).head);
    }
    let mut comp_v: HashMap<usize, Vec<usize>> = HashMap::new();
    for v in 0..n {
        comp_v.entry(dsu.find(v)).or_default().push(v);
    }
    let mut comp_e: HashMap<usize, usize> = HashMap::new();
    for &e in edges {
        *comp_e.entry(dsu.find(g.edge(e).tail)).or_default() += 1;
    }
    for (r, vs) in &comp_v {
        let ne = comp_e.get(r).copied().unwrap_or(0);
        let nroots = vs.iter().filter(|&&v| roots[v]).count();
        let ok = match nroots {
            0 => ne == vs.len(),
            1 => ne + 1 == vs.len(),
            _ => false,
        };
        if !ok {
            return None;
        }
    }
    let mut components: Vec<Vec<usize>> = comp_v.into_values().collect();
    components.sort();
    let cycles = extract_cycles(g, edges);
    Some(Crsf {
        edges: edges.to_vec(),
        components,
        cycles,
    })
}

/// Strips degree-one vertices repeatedly; what remains is a disjoint union of
/// cycles, each returned as a closed walk starting from its smallest vertex.
fn extract_cycles(g: &Graph, edges: &[usize]) -> Vec<Vec<DirEdge>> {
    let n = g.n();
    let mut alive: Vec<bool> = vec![false; g.m()];
    let mut deg = vec![0usize; n];
    for &e in edges {
        alive[e] = true;
        deg[g.edge(e).tail] += 1;
        deg[g.edge(e).head] += 1;
    }
    let mut stack: Vec<usize> = (0..n).filter(|&v| deg[v] == 1).collect();
    while let Some(v) = stack.pop() {
        if deg[v] != 1 {
            continue;
        }
        let e = edges
            .iter()
            .copied()
            .find(|&e| alive[e] && (g.edge(e).tail == v || g.edge(e).head == v))
            .unwrap();
        alive[e] = false;
        deg[v] -= 1;
        let w = g.edge(e).other(v);
        deg[w] -= 1;
        if deg[w] == 1 {
            stack.push(w);
        }
    }
    let mut cycles = Vec::new();
    let mut used = vec![false; g.m()];
    for start in 0..n {
        if deg[start] == 0 {
            continue;
        }
        let Some(first) = edges.iter().copied().find(|&e| {
            alive[e] && !used[e] && (g.edge(e).tail == start || g.edge(e).head == start)
        }) else {
            continue;
        };
        let mut walk = Vec::new();
        let mut v = start;
        let mut e = first;
        loop {
            used[e] = true;
            let d = DirEdge::new(e, g.edge(e).tail == v);
            walk.push(d);
            v = g.dst(d);
            if v == start {
                break;
            }
            e = edges
                .iter()
                .copied()
                .find(|&x| alive[x] && !used[x] && (g.edge(x).tail == v || g.edge(x).head == v))
                .unwrap();
        }
        cycles.push(walk);
    }
    cycles
}

fn guard(what: &'static str, count: f64, limit: f64) -> Result<()> {
    if count > limit {
        return Err(Error::Guard { what, count, limit });
    }
    Ok(())
}

/// Every CRSF of `g`, in lexicographic order of edge sets.
pub fn enumerate_crsfs(g: &Graph) -> Result<Vec<Crsf>> {
    enumerate_essential(g, &[])
}

/// Essential CRSFs: trees meeting `s` exactly once and cycle-rooted trees avoiding `s`.
pub fn enumerate_essential(g: &Graph, s: &[usize]) -> Result<Vec<Crsf>> {
    let mut roots = vec![false; g.n()];
    for &v in s {
        roots[v] = true;
    }
    let k = g.n() - roots.iter().filter(|&&r| r).count();
    guard("edge subsets", binomial(g.m(), k), SUBSET_LIMIT)?;
    Ok(combinations(g.m(), k, |idx| classify(g, idx, &roots)))
}

fn edge_product(g: &Graph, edges: &[usize], variant: Variant) -> f64 {
    match variant {
        Variant::Standard => 1.0,
        _ => edges.iter().map(|&e| g.edge(e).conductance).product(),
    }
}

/// Right-hand side of the line-bundle determinant identity:
/// `Σ ∏_e c_e ∏_cycles (2 - w - 1/w)` over CRSFs (Standard, Weighted), over
/// essential CRSFs for the boundary of `g` (Dirichlet), or the oriented sum
/// [`ocrsf_sum`] (Directed).
pub fn weighted_sum(g: &Graph, conn: &LineConnection, variant: Variant) -> Result<C64> {
    match variant {
        Variant::Directed => ocrsf_sum(g, conn, &[]),
        Variant::Dirichlet if g.is_directed() => ocrsf_sum(g, conn, g.boundary()),
        _ => {
            if variant == Variant::Weighted && g.is_directed() {
                return Err(Error::invalid("weighted sum needs symmetric conductances"));
            }
            let s: &[usize] = if variant == Variant::Dirichlet {
                g.boundary()
            } else {
                &[]
            };
            let forests = enumerate_essential(g, s)?;
            Ok(forests
                .par_iter()
                .map(|f| {
                    let cyc: C64 = f
                        .monodromies(conn)
                        .into_iter()
                        .map(|w| 2.0 - w - w.inv())
                        .product();
                    cyc * edge_product(g, &f.edges, variant)
                })
                .sum())
        }
    }
}

/// SL₂ right-hand side `Σ ∏_e c_e ∏_cycles (2 - tr w)`.
pub fn weighted_sum_sl2(g: &Graph, conn: &Sl2Connection, variant: Variant) -> Result<C64> {
    if g.is_directed() && variant != Variant::Standard {
        return Err(Error::invalid("SL2 sums need symmetric conductances"));
    }
    let s: &[usize] = if variant == Variant::Dirichlet {
        g.boundary()
    } else {
        &[]
    };
    let forests = enumerate_essential(g, s)?;
    Ok(forests
        .par_iter()
        .map(|f| {
            let cyc: C64 = f
                .sl2_monodromies(conn)
                .into_iter()
                .map(|w| 2.0 - w.trace())
                .product();
            cyc * edge_product(g, &f.edges, variant)
        })
        .sum())
}

/// An out-edge choice for each non-root vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Ocrsf {
    /// Out-arc per vertex (`None` at roots), as arc ids of the digraph.
    pub out: Vec<Option<usize>>,
    /// Oriented cycles as arc-id lists.
    pub cycles: Vec<Vec<usize>>,
}

/// Every choice of one outgoing arc per vertex outside `roots`.
pub fn enumerate_ocrsfs(d: &Digraph, roots: &[usize]) -> Result<Vec<Ocrsf>> {
    let out = d.out_arcs();
    let n = d.n();
    let is_root: Vec<bool> = (0..n).map(|v| roots.contains(&v)).collect();
    let choices: Vec<&[usize]> = (0..n)
        .map(|v| if is_root[v] { &[][..] } else { &out[v][..] })
        .collect();
    if choices
        .iter()
        .enumerate()
        .any(|(v, c)| !is_root[v] && c.is_empty())
    {
        return Ok(Vec::new());
    }
    let total: f64 = choices.iter().map(|c| c.len().max(1) as f64).product();
    guard("out-edge configurations", total, CONFIG_LIMIT)?;
    let total = total as usize;
    let configs: Vec<Ocrsf> = (0..total)
        .into_par_iter()
        .map(|mut code| {
            let mut pick = vec![None; n];
            for v in 0..n {
                if is_root[v] {
                    continue;
                }
                let k = choices[v].len();
                pick[v] = Some(choices[v][code % k]);
                code /= k;
            }
            let cycles = functional_cycles(d, &pick);
            Ocrsf { out: pick, cycles }
        })
        .collect();
    Ok(configs)
}

fn functional_cycles(d: &Digraph, pick: &[Option<usize>]) -> Vec<Vec<usize>> {
    let n = d.n();
    // 0 = unvisited, 1 = on current path, 2 = done
    let mut state = vec![0u8; n];
    let mut cycles = Vec::new();
    for start in 0..n {
        let mut path = Vec::new();
        let mut v = start;
        while state[v] == 0 {
            state[v] = 1;
            path.push(v);
            match pick[v] {
                Some(a) => v = d.arcs()[a].head,
                None => break,
            }
        }
        if state[v] == 1 && pick[v].is_some() {
            let pos = path.iter().position(|&x| x == v).unwrap();
            if pos < path.len() && pick[*path.last().unwrap()].is_some() {
                cycles.push(path[pos..].iter().map(|&x| pick[x].unwrap()).collect());
            }
        }
        for x in path {
            state[x] = 2;
        }
    }
    cycles
}

/// Oriented sum `Σ ∏_{v ∉ roots} c(out(v)) ∏_cycles (1 - w)` on the doubled
/// digraph of `g`, with transports taken from `conn`.
pub fn ocrsf_sum(g: &Graph, conn: &LineConnection, roots: &[usize]) -> Result<C64> {
    let d = g.to_digraph();
    let transports: Vec<C64> = (0..g.m())
        .flat_map(|e| [conn.get(e), conn.get(e).inv()])
        .collect();
    ocrsf_sum_digraph(&d, &transports, roots)
}

pub fn ocrsf_sum_digraph(d: &Digraph, transports: &[C64], roots: &[usize]) -> Result<C64> {
    let configs = enumerate_ocrsfs(d, roots)?;
    Ok(configs
        .par_iter()
        .map(|c| {
            let bush: f64 = c
                .out
                .iter()
                .flatten()
                .map(|&a| d.arcs()[a].weight)
                .product();
            let cyc: C64 = c
                .cycles
                .iter()
                .map(|cy| 1.0 - cy.iter().map(|&a| transports[a]).product::<C64>())
                .product();
            cyc * bush
        })
        .sum())
}

/// Number of north/east configurations on the `m × n` directed torus by the
/// total homology class `(j, k)` of their cycles.
pub fn enumerate_monotone_configs(m: usize, n: usize) -> Result<BTreeMap<(i64, i64), u64>> {
    guard("torus cells", (m * n) as f64, 24.0)?;
    let t = directed_torus(m, n)?;
    let d = &t.digraph;
    let mut wrap = vec![(0i64, 0i64); d.arcs().len()];
    for &a in &t.east_wrap {
        wrap[a].0 += 1;
    }
    for &a in &t.north_wrap {
        wrap[a].1 += 1;
    }
    let nv = m * n;
    let counts: Vec<(i64, i64)> = (0..1usize << nv)
        .into_par_iter()
        .map(|code| {
            // Arc 2v is east, 2v + 1 is north.
            let pick: Vec<Option<usize>> =
                (0..nv).map(|v| Some(2 * v + ((code >> v) & 1))).collect();
            functional_cycles(d, &pick).iter().fold((0, 0), |acc, cy| {
                cy.iter()
                    .fold(acc, |(j, k), &a| (j + wrap[a].0, k + wrap[a].1))
            })
        })
        .collect();
    let mut hist = BTreeMap::new();
    for c in counts {
        *hist.entry(c).or_insert(0) += 1;
    }
    Ok(hist)
}

/// Every spanning tree of `g` with its weight `∏ c_e`.
pub fn enumerate_spanning_trees(g: &Graph) -> Result<Vec<(Vec<usize>, f64)>> {
    if g.n() == 0 {
        return Ok(Vec::new());
    }
    guard("edge subsets", binomial(g.m(), g.n() - 1), SUBSET_LIMIT)?;
    let trees = combinations(g.m(), g.n() - 1, |idx| {
        let mut dsu = Dsu::new(g.n());
        idx.iter()
            .all(|&e| dsu.union(g.edge(e).tail, g.edge(e).head))
            .then(|| {
                (
                    idx.to_vec(),
                    idx.iter().map(|&e| g.edge(e).conductance).product(),
                )
            })
    });
    guard("spanning trees", trees.len() as f64, TREE_LIMIT)?;
    Ok(trees)
}

/// Exact law of the tree path from `z1` to `z2` in the weighted uniform
/// spanning tree, which is the law of the loop-erased walk from `z1` stopped
/// at `z2`. Paths are listed as traversals from `z1`, sorted.
pub fn lerw_distribution(g: &Graph, z1: usize, z2: usize) -> Result<Vec<(Vec<DirEdge>, f64)>> {
    if z1 >= g.n() || z2 >= g.n() || z1 == z2 {
        return Err(Error::invalid("LERW endpoints must be distinct vertices"));
    }
    let trees = enumerate_spanning_trees(g)?;
    let total: f64 = trees.iter().map(|t| t.1).sum();
    let mut law: BTreeMap<Vec<DirEdge>, f64> = BTreeMap::new();
    for (edges, w) in &trees {
        *law.entry(tree_path(g, edges, z1, z2)).or_insert(0.0) += w / total;
    }
    Ok(law.into_iter().collect())
}

fn tree_path(g: &Graph, edges: &[usize], from: usize, to: usize) -> Vec<DirEdge> {
    let mut adj = vec![Vec::new(); g.n()];
    for &e in edges {
        adj[g.edge(e).tail].push(DirEdge::new(e, true));
        adj[g.edge(e).head].push(DirEdge::new(e, false));
    }
    let mut via: Vec<Option<DirEdge>> = vec![None; g.n()];
    let mut seen = vec![false; g.n()];
    let mut stack = vec![from];
    seen[from] = true;
    while let Some(v) = stack.pop() {
        for &d in &adj[v] {
            let w = g.dst(d);
            if !seen[w] {
                seen[w] = true;
                via[w] = Some(d);
                stack.push(w);
            }
        }
    }
    let mut path = Vec::new();
    let mut v = to;
    while v != from {
        let d = via[v].expect("tree spans");
        path.push(d);
        v = g.src(d);
    }
    path.reverse();
    path
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::LineConnection;
    use crate::graph::path;
    use crate::laplacian::BundleLaplacian;
    use crate::linalg::rel_err;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn k3() -> Graph {
        Graph::unit(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn combinations_are_complete_and_ordered() {
        let all = combinations(6, 3, |c| Some(c.to_vec()));
        assert_eq!(all.len(), 20);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(combinations(4, 0, |c| Some(c.len())), vec![0]);
    }

    #[test]
    fn k3_has_one_crsf() {
        let f = enumerate_crsfs(&k3()).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].cycles[0].len(), 3);
    }

    #[test]
    fn tree_has_none() {
        assert!(enumerate_crsfs(&path(5).unwrap()).unwrap().is_empty());
    }

    #[test]
    fn k3_weighted_sum() {
        let (z12, z23, z13) = (
            C64::from_polar(1.0, 0.4),
            C64::from_polar(1.0, -1.3),
            C64::from_polar(1.0, 2.2),
        );
        let conn = LineConnection::new(vec![z12, z23, z13]).unwrap();
        let s = weighted_sum(&k3(), &conn, Variant::Standard).unwrap();
        let w = z12 * z23 / z13;
        assert!((s - (2.0 - w - w.inv())).norm() < 1e-14);
        let det = BundleLaplacian::line(&k3(), &conn, Variant::Standard)
            .unwrap()
            .det()
            .unwrap();
        assert!(rel_err(s, det, 1e-12) < 1e-12);
    }

    #[test]
    fn trivial_connection_sums_to_zero() {
        let g = Graph::unit(5, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 2)]).unwrap();
        assert!(
            weighted_sum(&g, &LineConnection::trivial(6), Variant::Standard)
                .unwrap()
                .norm()
                < 1e-14
        );
    }

    #[test]
    fn bowtie_count_matches_determinant() {
        let g = Graph::unit(5, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 2)]).unwrap();
        let f = enumerate_crsfs(&g).unwrap();
        // Each triangle alone with the other side as a tree hanging off vertex 2.
        assert_eq!(f.len(), 6);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let conn = LineConnection::random_unitary(6, &mut rng);
        let det = BundleLaplacian::line(&g, &conn, Variant::Standard)
            .unwrap()
            .det()
            .unwrap();
        assert!(
            rel_err(
                weighted_sum(&g, &conn, Variant::Standard).unwrap(),
                det,
                1e-12
            ) < 1e-10
        );
    }

    #[test]
    fn oriented_and_unoriented_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = Graph::unit(4, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (1, 3)]).unwrap();
        let conn = LineConnection::random_unitary(6, &mut rng);
        let a = weighted_sum(&g, &conn, Variant::Standard).unwrap();
        let b = ocrsf_sum(&g, &conn, &[]).unwrap();
        assert!(rel_err(a, b, 1e-12) < 1e-10);
    }

    #[test]
    fn directed_two_by_two_torus() {
        let t = directed_torus(2, 2).unwrap();
        let (z, w) = (C64::from_polar(1.0, 0.7), C64::from_polar(1.0, -0.3));
        let mut tr = vec![C64::new(1.0, 0.0); 8];
        for &a in &t.east_wrap {
            tr[a] = z;
        }
        for &a in &t.north_wrap {
            tr[a] = w;
        }
        assert_eq!(enumerate_ocrsfs(&t.digraph, &[]).unwrap().len(), 16);
        let s = ocrsf_sum_digraph(&t.digraph, &tr, &[]).unwrap();
        let mut prod = C64::new(1.0, 0.0);
        for u in [z.sqrt(), -z.sqrt()] {
            for v in [w.sqrt(), -w.sqrt()] {
                prod *= 2.0 - u - v;
            }
        }
        assert!(rel_err(s, prod, 1e-12) < 1e-12);
    }

    #[test]
    fn monotone_histograms() {
        let h = enumerate_monotone_configs(1, 1).unwrap();
        assert_eq!(h.get(&(1, 0)), Some(&1));
        assert_eq!(h.get(&(0, 1)), Some(&1));
        let h = enumerate_monotone_configs(2, 2).unwrap();
        assert_eq!(h.values().sum::<u64>(), 16);
        let h = enumerate_monotone_configs(3, 3).unwrap();
        for (&(j, k), &c) in &h {
            assert_eq!(h.get(&(k, j)), Some(&c));
        }
    }

    #[test]
    fn lerw_small_cases() {
        let law = lerw_distribution(&path(3).unwrap(), 0, 2).unwrap();
        assert_eq!(law.len(), 1);
        assert!((law[0].1 - 1.0).abs() < 1e-15);
        let law = lerw_distribution(&k3(), 0, 1).unwrap();
        let direct = law.iter().find(|(p, _)| p.len() == 1).unwrap().1;
        let around = law.iter().find(|(p, _)| p.len() == 2).unwrap().1;
        assert!((direct - 2.0 / 3.0).abs() < 1e-15 && (around - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn guard_is_an_error() {
        let g = crate::graph::torus(5, 5).unwrap().graph;
        assert!(matches!(enumerate_crsfs(&g), Err(Error::Guard { .. })));
    }
}
