use std::f64::consts::TAU;

use super::{CMatrix, C64};
use crate::error::{Error, Result};
use crate::par::*;

/// Laurent polynomial `Σ_{k=low}^{high} c_k z^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentPoly {
    low: i64,
    coeffs: Vec<C64>,
}

/// Interpolation result with the worst relative misfit at the sample points.
#[derive(Debug, Clone)]
pub struct Interpolated<P> {
    pub poly: P,
    pub residual: f64,
}

impl LaurentPoly {
    pub fn new(low: i64, coeffs: Vec<C64>) -> Self {
        LaurentPoly { low, coeffs }
    }

    /// Symmetric Laurent polynomial from ascending coefficients `c_{-d}..c_d`.
    pub fn symmetric_from(coeffs: Vec<C64>) -> Self {
        assert!(coeffs.len() % 2 == 1, "need 2d+1 coefficients");
        let d = (coeffs.len() / 2) as i64;
        LaurentPoly { low: -d, coeffs }
    }

    pub fn low(&self) -> i64 {
        self.low
    }

    pub fn high(&self) -> i64 {
        self.low + self.coeffs.len() as i64 - 1
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: i64) -> C64 {
        if k < self.low || k > self.high() {
            return C64::new(0.0, 0.0);
        }
        self.coeffs[(k - self.low) as usize]
    }

    pub fn eval(&self, z: C64) -> C64 {
        // Horner in z on the shifted polynomial, then multiply back by z^low.
        let mut acc = C64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc * z.powi(self.low as i32)
    }

    pub fn derivative(&self) -> LaurentPoly {
        let coeffs = (self.low..=self.high())
            .map(|k| self.coeff(k) * k as f64)
            .collect::<Vec<_>>();
        // d/dz z^k = k z^{k-1}
        LaurentPoly {
            low: self.low - 1,
            coeffs,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `max_k |c_k - c_{-k}|` relative to the largest coefficient.
    pub fn reciprocity_defect(&self) -> f64 {
        let top = self.low.abs().max(self.high().abs());
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        (1..=top)
            .map(|k| (self.coeff(k) - self.coeff(-k)).norm())
            .fold(0.0, f64::max)
            / scale
    }

    pub fn is_reciprocal(&self, tol: f64) -> bool {
        self.reciprocity_defect() <= tol
    }

    /// Largest imaginary part relative to the largest coefficient.
    pub fn imaginary_defect(&self) -> f64 {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        self.coeffs.iter().map(|c| c.im.abs()).fold(0.0, f64::max) / scale
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.imaginary_defect() <= tol
    }

    /// Drops coefficients of absolute size `<= abs_tol` from both ends and from
    /// the interior (set to zero).
    pub fn trimmed(&self, abs_tol: f64) -> LaurentPoly {
        let keep: Vec<bool> = self.coeffs.iter().map(|c| c.norm() > abs_tol).collect();
        let Some(first) = keep.iter().position(|&k| k) else {
            return LaurentPoly {
                low: 0,
                coeffs: vec![],
            };
        };
        let last = keep.iter().rposition(|&k| k).unwrap();
        let coeffs = (first..=last)
            .map(|i| {
                if keep[i] {
                    self.coeffs[i]
                } else {
                    C64::new(0.0, 0.0)
                }
            })
            .collect();
        LaurentPoly {
            low: self.low + first as i64,
            coeffs,
        }
    }
}

/// The `n`-th roots of unity `e^{2πik/n}`, `k = 0..n`.
pub fn roots_of_unity(n: usize) -> Vec<C64> {
    (0..n)
        .map(|k| C64::from_polar(1.0, TAU * k as f64 / n as f64))
        .collect()
}

fn is_roots_of_unity(points: &[C64]) -> bool {
    let n = points.len();
    points
        .iter()
        .zip(roots_of_unity(n))
        .all(|(p, r)| (p - r).norm() <= 1e-12)
}

/// Fits `Σ_{|k|≤d} c_k z^k` to samples on the unit circle.
///
/// When the points are the `N`-th roots of unity in order the fit is a
/// discrete Fourier transform; otherwise a least-squares Vandermonde solve.
/// With more than `2d + 1` samples the reported residual exposes aliasing.
pub fn interpolate_laurent(
    samples: &[(C64, C64)],
    degree_bound: usize,
) -> Result<Interpolated<LaurentPoly>> {
    let d = degree_bound as i64;
    let width = 2 * degree_bound + 1;
    if samples.len() < width {
        return Err(Error::InsufficientSamples {
            needed: width,
            got: samples.len(),
        });
    }
    let points: Vec<C64> = samples.iter().map(|s| s.0).collect();
    if points.iter().any(|p| (p.norm() - 1.0).abs() > 1e-12) {
        return Err(Error::invalid(
            "interpolation points must lie on the unit circle",
        ));
    }
    let coeffs = if is_roots_of_unity(&points) {
        let n = samples.len() as f64;
        (-d..=d)
            .map(|k| {
                samples
                    .iter()
                    .map(|(z, v)| v * z.powi(-k as i32))
                    .sum::<C64>()
                    / n
            })
            .collect()
    } else {
        let v = CMatrix::from_fn(samples.len(), width, |i, j| {
            points[i].powi(j as i32 - d as i32)
        });
        let vh = v.adjoint();
        let gram = &vh * &v;
        let rhs = vh.mul_vec(&samples.iter().map(|s| s.1).collect::<Vec<_>>());
        let lu = gram.lu()?;
        if lu.is_singular() {
            return Err(Error::invalid("interpolation points are not distinct"));
        }
        lu.solve(&rhs)?
    };
    let poly = LaurentPoly { low: -d, coeffs };
    let scale = samples
        .iter()
        .map(|s| s.1.norm())
        .fold(f64::MIN_POSITIVE, f64::max);
    let residual = samples
        .iter()
        .map(|(z, v)| (poly.eval(*z) - v).norm())
        .fold(0.0, f64::max)
        / scale;
    Ok(Interpolated { poly, residual })
}

/// Samples `f` at `2d + 1 + extra` roots of unity and interpolates.
pub fn interpolate_on_circle<F>(
    f: F,
    degree_bound: usize,
    extra: usize,
) -> Result<Interpolated<LaurentPoly>>
where
    F: Fn(C64) -> Result<C64> + Sync,
{
    let pts = roots_of_unity(2 * degree_bound + 1 + extra);
    let values: Vec<Result<C64>> = pts.par_iter().map(|&z| f(z)).collect();
    let mut samples = Vec::with_capacity(pts.len());
    for (z, v) in pts.into_iter().zip(values) {
        samples.push((z, v?));
    }
    interpolate_laurent(&samples, degree_bound)
}

/// Bivariate Laurent polynomial `Σ c_{jk} z^j w^k` on a rectangle of exponents.
#[derive(Debug, Clone, PartialEq)]
pub struct BivariateLaurent {
    z_range: (i64, i64),
    w_range: (i64, i64),
    coeffs: Vec<C64>,
}

impl BivariateLaurent {
    pub fn z_range(&self) -> (i64, i64) {
        self.z_range
    }

    pub fn w_range(&self) -> (i64, i64) {
        self.w_range
    }

    fn width(&self) -> usize {
        (self.w_range.1 - self.w_range.0 + 1) as usize
    }

    pub fn coeff(&self, j: i64, k: i64) -> C64 {
        if j < self.z_range.0 || j > self.z_range.1 || k < self.w_range.0 || k > self.w_range.1 {
            return C64::new(0.0, 0.0);
        }
        self.coeffs[(j - self.z_range.0) as usize * self.width() + (k - self.w_range.0) as usize]
    }

    pub fn eval(&self, z: C64, w: C64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for j in self.z_range.0..=self.z_range.1 {
            for k in self.w_range.0..=self.w_range.1 {
                acc += self.coeff(j, k) * z.powi(j as i32) * w.powi(k as i32);
            }
        }
        acc
    }

    /// Two-dimensional DFT fit of `f` over the given exponent rectangle.
    ///
    /// Uses one more point than the span in each direction so the residual
    /// detects a rectangle that is too small.
    pub fn interpolate<F>(
        f: F,
        z_range: (i64, i64),
        w_range: (i64, i64),
    ) -> Result<Interpolated<Self>>
    where
        F: Fn(C64, C64) -> Result<C64> + Sync,
    {
        if z_range.0 > z_range.1 || w_range.0 > w_range.1 {
            return Err(Error::invalid("empty exponent range"));
        }
        let nz = (z_range.1 - z_range.0 + 2) as usize;
        let nw = (w_range.1 - w_range.0 + 2) as usize;
        let zs = roots_of_unity(nz);
        let ws = roots_of_unity(nw);
        let grid: Vec<(usize, usize)> =
            (0..nz).flat_map(|a| (0..nw).map(move |b| (a, b))).collect();
        let values: Vec<Result<C64>> = grid.par_iter().map(|&(a, b)| f(zs[a], ws[b])).collect();
        let mut vals = Vec::with_capacity(values.len());
        for v in values {
            vals.push(v?);
        }
        let width = (w_range.1 - w_range.0 + 1) as usize;
        let mut coeffs = Vec::with_capacity((nz - 1) * width);
        for j in z_range.0..=z_range.1 {
            for k in w_range.0..=w_range.1 {
                let mut s = C64::new(0.0, 0.0);
                for (idx, &(a, b)) in grid.iter().enumerate() {
                    s += vals[idx] * zs[a].powi(-j as i32) * ws[b].powi(-k as i32);
                }
                coeffs.push(s / (nz * nw) as f64);
            }
        }
        let poly = BivariateLaurent {
            z_range,
            w_range,
            coeffs,
        };
        let scale = vals
            .iter()
            .map(|v| v.norm())
            .fold(f64::MIN_POSITIVE, f64::max);
        let residual = grid
            .iter()
            .zip(&vals)
            .map(|(&(a, b), v)| (poly.eval(zs[a], ws[b]) - v).norm())
            .fold(0.0, f64::max)
            / scale;
        Ok(Interpolated { poly, residual })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn recovers_two_minus_z_minus_inverse() {
        let samples: Vec<_> = roots_of_unity(5)
            .into_iter()
            .map(|z| (z, 2.0 - z - z.inv()))
            .collect();
        let p = interpolate_laurent(&samples, 2).unwrap().poly;
        for (k, want) in [(-2, 0.0), (-1, -1.0), (0, 2.0), (1, -1.0), (2, 0.0)] {
            assert!((p.coeff(k) - want).norm() < 1e-14, "k={k}");
        }
        assert!(p.is_reciprocal(1e-12));
    }

    #[test]
    fn degree_three_reciprocal_round_trip() {
        let p = LaurentPoly::symmetric_from(
            [0.5, -1.5, 2.0, 7.0, 2.0, -1.5, 0.5]
                .iter()
                .map(|&x| c(x, 0.0))
                .collect(),
        );
        let fit = interpolate_on_circle(|z| Ok(p.eval(z)), 3, 0).unwrap();
        for k in -3..=3 {
            assert!((fit.poly.coeff(k) - p.coeff(k)).norm() < 1e-10);
        }
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn aliasing_is_flagged() {
        let fit = interpolate_on_circle(|z| Ok(z.powi(4) + z.powi(-4)), 2, 6).unwrap();
        assert!(fit.residual > 1e-6);
    }

    #[test]
    fn generic_points_use_least_squares() {
        let p = LaurentPoly::new(-1, vec![c(1.0, 1.0), c(0.5, 0.0), c(-2.0, 0.3)]);
        let pts: Vec<_> = (0..7)
            .map(|k| C64::from_polar(1.0, 0.37 + 0.8 * k as f64))
            .collect();
        let samples: Vec<_> = pts.iter().map(|&z| (z, p.eval(z))).collect();
        let fit = interpolate_laurent(&samples, 2).unwrap();
        for k in -2..=2 {
            assert!((fit.poly.coeff(k) - p.coeff(k)).norm() < 1e-10);
        }
    }

    #[test]
    fn too_few_samples() {
        let samples: Vec<_> = roots_of_unity(4).into_iter().map(|z| (z, z)).collect();
        assert!(matches!(
            interpolate_laurent(&samples, 2),
            Err(Error::InsufficientSamples { needed: 5, got: 4 })
        ));
    }

    #[test]
    fn derivative_and_trim() {
        let p = LaurentPoly::symmetric_from(vec![c(-1.0, 0.0), c(2.0, 0.0), c(-1.0, 0.0)]);
        let dp = p.derivative();
        assert!(dp.eval(c(1.0, 0.0)).norm() < 1e-15);
        let padded = LaurentPoly::new(
            -3,
            vec![
                c(1e-17, 0.0),
                c(0.0, 0.0),
                c(-1.0, 0.0),
                c(2.0, 0.0),
                c(-1.0, 0.0),
                c(0.0, 0.0),
                c(1e-18, 0.0),
            ],
        );
        let t = padded.trimmed(1e-12);
        assert_eq!((t.low(), t.high()), (-1, 1));
    }

    #[test]
    fn bivariate_round_trip() {
        let f = |z: C64, w: C64| Ok(2.0 - z - w + 0.5 * z * z * w.inv());
        let fit = BivariateLaurent::interpolate(f, (0, 2), (-1, 1)).unwrap();
        assert!((fit.poly.coeff(0, 0) - 2.0).norm() < 1e-12);
        assert!((fit.poly.coeff(2, -1) - 0.5).norm() < 1e-12);
        assert!((fit.poly.coeff(1, 1)).norm() < 1e-12);
        assert!(fit.residual < 1e-12);
    }
}
