use std::ops::{Add, Mul, Neg, Sub};

use super::{pfaffian::pfaffian_with, CMatrix, C64};
use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

/// 2×2 complex matrix `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl Mat2 {
    pub const ZERO: Mat2 = Mat2::real(0.0, 0.0, 0.0, 0.0);
    pub const IDENTITY: Mat2 = Mat2::real(1.0, 0.0, 0.0, 1.0);

    pub const fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mat2 { a, b, c, d }
    }

    pub const fn real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2 {
            a: C64::new(a, 0.0),
            b: C64::new(b, 0.0),
            c: C64::new(c, 0.0),
            d: C64::new(d, 0.0),
        }
    }

    pub fn scalar(s: C64) -> Self {
        Mat2::new(s, C64::new(0.0, 0.0), C64::new(0.0, 0.0), s)
    }

    pub fn det(&self) -> C64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> C64 {
        self.a + self.d
    }

    /// Adjugate `[[d, -b], [-c, a]]`; equals the inverse when `det = 1`.
    pub fn adj(&self) -> Self {
        Mat2::new(self.d, -self.b, -self.c, self.a)
    }

    pub fn inverse(&self) -> Result<Self> {
        let det = self.det();
        if det.norm() <= f64::EPSILON * self.max_abs().powi(2) {
            return Err(Error::Singular { pivot: det.norm() });
        }
        Ok(self.adj().scale(det.inv()))
    }

    pub fn scale(&self, s: C64) -> Self {
        Mat2::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn max_abs(&self) -> f64 {
        self.a
            .norm()
            .max(self.b.norm())
            .max(self.c.norm())
            .max(self.d.norm())
    }

    pub fn dist(&self, other: &Mat2) -> f64 {
        (*self - *other).max_abs()
    }

    pub fn is_scalar(&self, tol: f64) -> bool {
        self.b.norm() <= tol && self.c.norm() <= tol && (self.a - self.d).norm() <= tol
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, r: Mat2) -> Mat2 {
        Mat2::new(
            self.a * r.a + self.b * r.c,
            self.a * r.b + self.b * r.d,
            self.c * r.a + self.d * r.c,
            self.c * r.b + self.d * r.d,
        )
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, r: Mat2) -> Mat2 {
        Mat2::new(self.a + r.a, self.b + r.b, self.c + r.c, self.d + r.d)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, r: Mat2) -> Mat2 {
        Mat2::new(self.a - r.a, self.b - r.b, self.c - r.c, self.d - r.d)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(C64::new(-1.0, 0.0))
    }
}

/// Square array of 2×2 blocks `M_ij`.
///
/// Self-duality (`M_ij = adj(M_ji)`, scalar diagonal) is checked by
/// [`SelfDualMatrix::validate`] and required by [`SelfDualMatrix::qdet`].
#[derive(Debug, Clone, PartialEq)]
pub struct SelfDualMatrix {
    n: usize,
    blocks: Vec<Mat2>,
}

impl SelfDualMatrix {
    pub fn zeros(n: usize) -> Self {
        SelfDualMatrix {
            n,
            blocks: vec![Mat2::ZERO; n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Mat2) -> Self {
        let mut blocks = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                blocks.push(f(i, j));
            }
        }
        SelfDualMatrix { n, blocks }
    }

    /// Reads the blocks of a `2n × 2n` matrix.
    pub fn from_realized(m: &CMatrix) -> Result<Self> {
        if !m.is_square() || m.rows() % 2 == 1 {
            return Err(Error::invalid(format!(
                "{}x{} is not a square block matrix",
                m.rows(),
                m.cols()
            )));
        }
        let n = m.rows() / 2;
        Ok(Self::from_fn(n, |i, j| {
            Mat2::new(
                m[(2 * i, 2 * j)],
                m[(2 * i, 2 * j + 1)],
                m[(2 * i + 1, 2 * j)],
                m[(2 * i + 1, 2 * j + 1)],
            )
        }))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn block(&self, i: usize, j: usize) -> Mat2 {
        self.blocks[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, m: Mat2) {
        self.blocks[i * self.n + j] = m;
    }

    pub fn add_to(&mut self, i: usize, j: usize, m: Mat2) {
        let k = i * self.n + j;
        self.blocks[k] = self.blocks[k] + m;
    }

    /// The `2n × 2n` complex matrix `M'`.
    pub fn realize(&self) -> CMatrix {
        let mut out = CMatrix::zeros(2 * self.n, 2 * self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                let b = self.block(i, j);
                out[(2 * i, 2 * j)] = b.a;
                out[(2 * i, 2 * j + 1)] = b.b;
                out[(2 * i + 1, 2 * j)] = b.c;
                out[(2 * i + 1, 2 * j + 1)] = b.d;
            }
        }
        out
    }

    pub fn principal(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), |i, j| self.block(idx[i], idx[j]))
    }

    /// Largest violation of `M_ij = adj(M_ji)` or of scalar diagonal blocks.
    pub fn self_dual_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..self.n {
            let d = self.block(i, i);
            dev = dev.max(d.b.norm()).max(d.c.norm()).max((d.a - d.d).norm());
            for j in i + 1..self.n {
                dev = dev.max(self.block(i, j).dist(&self.block(j, i).adj()));
            }
        }
        dev
    }

    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        let scale = self.blocks.iter().map(Mat2::max_abs).fold(1.0, f64::max);
        let deviation = self.self_dual_deviation();
        if deviation > tol.self_dual * scale {
            return Err(Error::NotSelfDual { deviation });
        }
        Ok(())
    }

    /// `Z M'` with `Z` block-diagonal `[[0, 1], [-1, 0]]`; antisymmetric when `M` is self-dual.
    pub fn z_times_realized(&self) -> CMatrix {
        let mut m = self.realize();
        for i in 0..self.n {
            for j in 0..2 * self.n {
                let top = m[(2 * i, j)];
                let bottom = m[(2 * i + 1, j)];
                m[(2 * i, j)] = bottom;
                m[(2 * i + 1, j)] = -top;
            }
        }
        m
    }

    /// Q-determinant, computed as the Pfaffian of `Z M'`.
    pub fn qdet(&self) -> Result<C64> {
        self.qdet_with(&Tolerances::DEFAULT)
    }

    pub fn qdet_with(&self, tol: &Tolerances) -> Result<C64> {
        self.validate(tol)?;
        if self.n == 0 {
            return Ok(C64::new(1.0, 0.0));
        }
        let mut zm = self.z_times_realized();
        // Remove rounding-level asymmetry before the Pfaffian's own check.
        let dim = zm.rows();
        for i in 0..dim {
            zm[(i, i)] = C64::new(0.0, 0.0);
            for j in i + 1..dim {
                let avg = (zm[(i, j)] - zm[(j, i)]) * 0.5;
                zm[(i, j)] = avg;
                zm[(j, i)] = -avg;
            }
        }
        pfaffian_with(&zm, tol)
    }
}

/// Q-determinant by the permutation expansion
/// `Σ_σ sgn σ ∏_cycles ½ tr(M_{i σ(i)} M_{σ(i) σ²(i)} ⋯)`.
///
/// Factorial cost; kept as an independent check for `n ≤ 6`.
pub fn qdet_cycle_expansion(m: &SelfDualMatrix) -> Result<C64> {
    let n = m.n();
    if n > 6 {
        return Err(Error::Guard {
            what: "permutation expansion size",
            count: n as f64,
            limit: 6.0,
        });
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = C64::new(0.0, 0.0);
    loop {
        total += cycle_term(m, &perm);
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(total)
}

fn cycle_term(m: &SelfDualMatrix, perm: &[usize]) -> C64 {
    let n = perm.len();
    let mut seen = vec![false; n];
    let mut term = C64::new(1.0, 0.0);
    let mut transpositions = 0;
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut prod = Mat2::IDENTITY;
        let mut i = start;
        let mut len = 0;
        loop {
            seen[i] = true;
            prod = prod * m.block(i, perm[i]);
            i = perm[i];
            len += 1;
            if i == start {
                break;
            }
        }
        transpositions += len - 1;
        term *= prod.trace() * 0.5;
    }
    if transpositions % 2 == 1 {
        -term
    } else {
        term
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rel_err;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rc(rng: &mut ChaCha8Rng) -> C64 {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    }

    fn rmat(rng: &mut ChaCha8Rng) -> Mat2 {
        Mat2::new(rc(rng), rc(rng), rc(rng), rc(rng))
    }

    fn random_self_dual(n: usize, rng: &mut ChaCha8Rng) -> SelfDualMatrix {
        let mut m = SelfDualMatrix::zeros(n);
        for i in 0..n {
            m.set(i, i, Mat2::scalar(rc(rng)));
            for j in i + 1..n {
                let b = rmat(rng);
                m.set(i, j, b);
                m.set(j, i, b.adj());
            }
        }
        m
    }

    #[test]
    fn adjugate_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let mut a = rmat(&mut rng);
            let s = a.det().sqrt();
            a = a.scale(s.inv());
            assert!((a.det() - 1.0).norm() < 1e-12);
            assert!((a + a.adj()).dist(&Mat2::scalar(a.trace())) < 1e-12);
            assert!((a * a.inverse().unwrap()).dist(&Mat2::IDENTITY) < 1e-12);
        }
    }

    #[test]
    fn two_by_two_worked_example() {
        let (a, cc) = (C64::new(1.7, 0.2), C64::new(-0.4, 1.1));
        let b = Mat2::real(0.3, -1.2, 2.5, 0.7);
        let mut m = SelfDualMatrix::zeros(2);
        m.set(0, 0, Mat2::scalar(a));
        m.set(1, 1, Mat2::scalar(cc));
        m.set(0, 1, b);
        m.set(1, 0, b.adj());
        let expect = a * cc - (b.a * b.d - b.b * b.c);
        assert!((m.qdet().unwrap() - expect).norm() < 1e-14);
        assert!((qdet_cycle_expansion(&m).unwrap() - expect).norm() < 1e-14);
    }

    #[test]
    fn scalar_diagonal() {
        let vals = [C64::new(2.0, 0.0), C64::new(0.0, 1.0), C64::new(3.0, -1.0)];
        let m = SelfDualMatrix::from_fn(3, |i, j| {
            if i == j {
                Mat2::scalar(vals[i])
            } else {
                Mat2::ZERO
            }
        });
        let expect: C64 = vals.iter().product();
        assert!((m.qdet().unwrap() - expect).norm() < 1e-14);
    }

    #[test]
    fn pfaffian_route_matches_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in 1..=4 {
            for _ in 0..10 {
                let m = random_self_dual(n, &mut rng);
                let a = m.qdet().unwrap();
                let b = qdet_cycle_expansion(&m).unwrap();
                assert!(rel_err(a, b, 1e-12) < 1e-10, "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn rejects_non_self_dual() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut m = random_self_dual(2, &mut rng);
        m.set(0, 1, Mat2::real(1.0, 2.0, 3.0, 4.0));
        assert!(matches!(m.qdet(), Err(Error::NotSelfDual { .. })));
    }

    #[test]
    fn permutations_are_complete() {
        let mut p = vec![0, 1, 2, 3];
        let mut count = 1;
        while next_permutation(&mut p) {
            count += 1;
        }
        assert_eq!(count, 24);
    }
}
