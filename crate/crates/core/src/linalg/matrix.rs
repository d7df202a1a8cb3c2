use std::ops::{Add, Index, IndexMut, Mul, Sub};

use super::C64;
use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    pub fn from_real(rows: usize, cols: usize, values: &[f64]) -> Self {
        assert_eq!(values.len(), rows * cols);
        CMatrix {
            rows,
            cols,
            data: values.iter().map(|&v| C64::new(v, 0.0)).collect(),
        }
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        CMatrix {
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn diagonal(values: &[C64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }

    /// Principal submatrix on the given index set.
    pub fn principal(&self, idx: &[usize]) -> Self {
        self.submatrix(idx, idx)
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// Max row sum of absolute values.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Max column sum of absolute values.
    pub fn norm_one(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    fn require_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    /// LU factorization with partial pivoting.
    pub fn lu(&self) -> Result<Lu> {
        self.require_square()?;
        Ok(Lu::factor(self.clone(), Tolerances::DEFAULT.pivot))
    }

    pub fn lu_with(&self, tol: &Tolerances) -> Result<Lu> {
        self.require_square()?;
        Ok(Lu::factor(self.clone(), tol.pivot))
    }

    /// Determinant; exactly zero when a pivot falls below the relative pivot tolerance.
    pub fn det(&self) -> Result<C64> {
        Ok(self.lu()?.det())
    }

    pub fn inverse(&self) -> Result<Self> {
        self.lu()?.inverse()
    }

    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>> {
        self.lu()?.solve(b)
    }

    /// `D A D⁻¹` with `D` a diagonal of powers of two chosen so each row and
    /// column have comparable off-diagonal mass. Determinant and spectrum are
    /// unchanged exactly.
    pub fn balanced(&self) -> Result<Self> {
        self.require_square()?;
        let mut m = self.clone();
        let n = m.rows;
        for _ in 0..100 {
            let mut changed = false;
            for i in 0..n {
                let (mut c, mut r) = (0.0, 0.0);
                for j in (0..n).filter(|&j| j != i) {
                    c += m[(j, i)].norm();
                    r += m[(i, j)].norm();
                }
                if c == 0.0 || r == 0.0 {
                    continue;
                }
                let mut f = 1.0;
                let (mut cc, mut rr) = (c, r);
                while cc < rr / 2.0 {
                    f *= 2.0;
                    cc *= 4.0;
                }
                while cc >= rr * 2.0 {
                    f /= 2.0;
                    rr *= 4.0;
                }
                if (cc + rr) / f < 0.95 * (c + r) {
                    changed = true;
                    for j in 0..n {
                        m[(i, j)] /= f;
                        m[(j, i)] *= f;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        Ok(m)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in product");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let src = rhs.row(k);
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        out
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

/// Packed LU factors `PA = LU` (unit lower L).
#[derive(Debug, Clone)]
pub struct Lu {
    lu: CMatrix,
    perm: Vec<usize>,
    sign: f64,
    scale: f64,
    min_pivot: f64,
    singular: bool,
    norm_one: f64,
}

impl Lu {
    fn factor(mut a: CMatrix, rel_pivot: f64) -> Lu {
        let n = a.rows;
        let scale = a.max_abs();
        let norm_one = a.norm_one();
        let threshold = rel_pivot * scale.max(f64::MIN_POSITIVE);
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut min_pivot = f64::INFINITY;
        let mut singular = n > 0 && scale == 0.0;
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, a[(i, k)].norm()))
                .fold(
                    (k, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
            min_pivot = min_pivot.min(pmax);
            if pmax <= threshold {
                singular = true;
                continue;
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = a[(k, k)];
            for i in k + 1..n {
                let f = a[(i, k)] / pivot;
                a[(i, k)] = f;
                if f == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in k + 1..n {
                    let u = a[(k, j)];
                    a[(i, j)] -= f * u;
                }
            }
        }
        if n == 0 {
            min_pivot = 1.0;
        }
        Lu {
            lu: a,
            perm,
            sign,
            scale,
            min_pivot,
            singular,
            norm_one,
        }
    }

    pub fn dim(&self) -> usize {
        self.lu.rows
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    /// Smallest pivot magnitude met during elimination.
    pub fn min_pivot(&self) -> f64 {
        self.min_pivot
    }

    /// Largest entry of the factored matrix.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn det(&self) -> C64 {
        if self.singular {
            return C64::new(0.0, 0.0);
        }
        let mut d = C64::new(self.sign, 0.0);
        for i in 0..self.dim() {
            d *= self.lu[(i, i)];
        }
        d
    }

    /// `log|det|` and the phase `det/|det|`, for products that would overflow.
    pub fn log_det(&self) -> (f64, C64) {
        if self.singular {
            return (f64::NEG_INFINITY, C64::new(0.0, 0.0));
        }
        let mut logabs = 0.0;
        let mut phase = C64::new(self.sign, 0.0);
        for i in 0..self.dim() {
            let p = self.lu[(i, i)];
            logabs += p.norm().ln();
            phase *= p / p.norm();
        }
        (logabs, phase)
    }

    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>> {
        let n = self.dim();
        if b.len() != n {
            return Err(Error::Dimension {
                expected: n,
                actual: b.len(),
            });
        }
        if self.singular {
            return Err(Error::Singular {
                pivot: self.min_pivot,
            });
        }
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<CMatrix> {
        let n = self.dim();
        let mut inv = CMatrix::zeros(n, n);
        let mut e = vec![C64::new(0.0, 0.0); n];
        for j in 0..n {
            e.iter_mut().for_each(|x| *x = C64::new(0.0, 0.0));
            e[j] = C64::new(1.0, 0.0);
            let col = self.solve(&e)?;
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        Ok(inv)
    }

    /// One-norm condition number computed from an explicit inverse.
    pub fn condition(&self) -> f64 {
        match self.inverse() {
            Ok(inv) => self.norm_one * inv.norm_one(),
            Err(_) => f64::INFINITY,
        }
    }

    /// Inverse, refused when singular or when the condition estimate exceeds `limit`.
    pub fn guarded_inverse(&self, limit: f64) -> Result<CMatrix> {
        if self.singular {
            return Err(Error::Singular {
                pivot: self.min_pivot,
            });
        }
        let inv = self.inverse()?;
        let condition = self.norm_one * inv.norm_one();
        if !(condition <= limit) {
            return Err(Error::IllConditioned {
                condition,
                pivot: self.min_pivot,
            });
        }
        Ok(inv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
        CMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    #[test]
    fn identity_det_is_one() {
        assert_eq!(CMatrix::identity(5).det().unwrap(), C64::new(1.0, 0.0));
    }

    #[test]
    fn rank_one_is_singular() {
        let u = [1.0, 2.0, -1.0, 0.5];
        let m = CMatrix::from_fn(4, 4, |i, j| C64::new(u[i] * u[j], 0.0));
        assert_eq!(m.det().unwrap(), C64::new(0.0, 0.0));
        assert!(matches!(m.inverse(), Err(Error::Singular { .. })));
    }

    #[test]
    fn non_square_is_rejected() {
        assert!(matches!(
            CMatrix::zeros(2, 3).det(),
            Err(Error::NotSquare { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn det_is_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let a = random(8, &mut rng);
            let b = random(8, &mut rng);
            let lhs = (&a * &b).det().unwrap();
            let rhs = a.det().unwrap() * b.det().unwrap();
            assert!(super::super::rel_err(lhs, rhs, 0.0) < 1e-9);
        }
    }

    #[test]
    fn inverse_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random(10, &mut rng);
        let inv = a.inverse().unwrap();
        let r = &(&a * &inv) - &CMatrix::identity(10);
        assert!(r.norm_inf() < 1e-10);
        let (l, ph) = a.lu().unwrap().log_det();
        let d = a.det().unwrap();
        assert!((ph * l.exp() - d).norm() < 1e-10 * d.norm());
    }

    #[test]
    fn condition_guard() {
        let m = CMatrix::from_real(2, 2, &[1.0, 1.0, 1.0, 1.0 + 1e-13]);
        let lu = m.lu().unwrap();
        assert!(matches!(
            lu.guarded_inverse(1e12),
            Err(Error::IllConditioned { .. }) | Err(Error::Singular { .. })
        ));
    }
}
