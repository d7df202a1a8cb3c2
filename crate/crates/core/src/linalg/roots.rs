use nalgebra::DMatrix;

use super::C64;
use crate::error::{Error, Result};

/// Real polynomial with ascending coefficients `c_0 + c_1 x + …`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Poly { coeffs }
    }

    /// `∏ (x - r)`.
    pub fn from_roots(roots: &[f64]) -> Self {
        let mut p = Poly::new(vec![1.0]);
        for &r in roots {
            p = p.mul(&Poly::new(vec![-r, 1.0]));
        }
        p
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, x: C64) -> C64 {
        self.coeffs
            .iter()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() == 1 {
            return Poly::new(vec![0.0]);
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// All complex roots from the eigenvalues of the balanced companion matrix.
    pub fn roots(&self) -> Vec<C64> {
        let n = self.degree();
        if n == 0 {
            return vec![];
        }
        let lead = self.coeffs[n];
        let mut comp = DMatrix::<f64>::zeros(n, n);
        for i in 1..n {
            comp[(i, i - 1)] = 1.0;
        }
        for i in 0..n {
            comp[(i, n - 1)] = -self.coeffs[i] / lead;
        }
        balance(&mut comp);
        comp.complex_eigenvalues()
            .iter()
            .map(|z| C64::new(z.re, z.im))
            .collect()
    }

    /// Real roots in ascending order, with multiplicity.
    ///
    /// A root counts as real when `|Im r| <= tol · max(1, |r|)`; anything else
    /// is reported as an error carrying the offending root. Accepted roots are
    /// polished by Newton steps on the polynomial itself.
    pub fn real_roots(&self, tol: f64) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.degree());
        for r in self.roots() {
            if r.im.abs() > tol * r.norm().max(1.0) {
                return Err(Error::ComplexRoot { re: r.re, im: r.im });
            }
            out.push(self.polish(r.re));
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(out)
    }

    fn polish(&self, mut x: f64) -> f64 {
        let dp = self.derivative();
        let mut fx = self.eval(x).abs();
        for _ in 0..30 {
            let d = dp.eval(x);
            if d == 0.0 || fx == 0.0 {
                break;
            }
            let next = x - self.eval(x) / d;
            let fnext = self.eval(next).abs();
            if !(fnext < fx) {
                break;
            }
            x = next;
            fx = fnext;
        }
        x
    }
}

/// Diagonal similarity scaling by powers of two so rows and columns have
/// comparable norms before the eigen solve.
fn balance(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    let radix: f64 = 2.0;
    let mut converged = false;
    while !converged {
        converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].abs();
                    r += m[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let (mut cc, mut rr) = (c, r);
            while cc < rr / radix {
                f *= radix;
                cc *= radix * radix;
            }
            while cc >= rr * radix {
                f /= radix;
                rr *= radix * radix;
            }
            if (cc + rr) / f < 0.95 * s {
                converged = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn w_times_w_plus_two() {
        let p = Poly::new(vec![0.0, 2.0, 1.0]);
        let r = p.real_roots(1e-7).unwrap();
        assert!((r[0] + 2.0).abs() < 1e-14 && r[1].abs() < 1e-14);
    }

    #[test]
    fn wide_spread_roots() {
        let roots = [-3.1e6, -4.2e4, -610.0, -7.5, -0.3, 0.0];
        let p = Poly::from_roots(&roots);
        let found = p.real_roots(1e-7).unwrap();
        let mut want = roots.to_vec();
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in found.iter().zip(&want) {
            assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn double_root_kept_with_multiplicity() {
        let p = Poly::from_roots(&[-1.0, -1.0, -4.0]);
        let r = p.real_roots(1e-6).unwrap();
        assert_eq!(r.len(), 3);
        assert!((r[0] + 4.0).abs() < 1e-10);
        assert!((r[1] + 1.0).abs() < 1e-6 && (r[2] + 1.0).abs() < 1e-6);
    }

    #[test]
    fn complex_roots_are_rejected() {
        let p = Poly::new(vec![1.0, 0.0, 1.0]);
        assert!(matches!(p.real_roots(1e-7), Err(Error::ComplexRoot { .. })));
    }
}
