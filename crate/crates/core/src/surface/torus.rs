//! Coefficients of the limiting theta-function determinant on the square torus.

use std::collections::BTreeMap;

use crate::linalg::C64;
use crate::oracle::binomial;

/// `C_{jkm}` for primitive `(j, k)` (one per direction) with `|j|, |k| ≤ J`
/// and `1 ≤ m ≤ L`.
#[derive(Debug, Clone)]
pub struct TorusSpectrum {
    pub j_max: i64,
    pub l_max: usize,
    pub coefficients: BTreeMap<(i64, i64, usize), f64>,
    /// `e^{-(π/2) J²}`, the size of the first omitted class.
    pub tail_bound: f64,
}

impl TorusSpectrum {
    pub fn coefficient(&self, j: i64, k: i64, m: usize) -> f64 {
        self.coefficients
            .get(&canonical(j, k).map(|(a, b)| (a, b, m)).unwrap_or((0, 0, 0)))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.coefficients.values().sum()
    }

    /// `C_{jkm} / Σ C`.
    pub fn probability(&self, j: i64, k: i64, m: usize) -> f64 {
        self.coefficient(j, k, m) / self.total()
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Representative of `±(j, k)` with `j > 0`, or `(0, 1)`; `None` unless primitive.
fn canonical(j: i64, k: i64) -> Option<(i64, i64)> {
    if gcd(j, k) != 1 {
        return None;
    }
    Some(if j > 0 || (j == 0 && k > 0) {
        (j, k)
    } else {
        (-j, -k)
    })
}

/// Coefficient of `(2 - z - 1/z)^m` in the expansion of `2 - z^ℓ - z^{-ℓ}`.
pub fn chebyshev_rewrite_coeff(ell: usize, m: usize) -> f64 {
    if m == 0 || m > ell {
        return 0.0;
    }
    let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
    ell as f64 / m as f64 * binomial(m + ell - 1, 2 * m - 1) * sign
}

/// `Σ_m chebyshev_rewrite_coeff(ℓ, m) (2 - z - 1/z)^m`, which should equal `2 - z^ℓ - z^{-ℓ}`.
pub fn chebyshev_rewrite(ell: usize, z: C64) -> C64 {
    let w = 2.0 - z - z.inv();
    (1..=ell)
        .map(|m| w.powu(m as u32) * chebyshev_rewrite_coeff(ell, m))
        .sum()
}

/// `C_{jkm} = Σ_{ℓ ≤ L} (ℓ/m) C(m+ℓ-1, 2m-1) (-1)^{ℓ+m} q^{ℓ²}` with
/// `q = e^{-(π/2)(j²+k²)}`.
pub fn c_jkm(j: i64, k: i64, m: usize, l_max: usize) -> f64 {
    let q_log = -std::f64::consts::FRAC_PI_2 * (j * j + k * k) as f64;
    (m..=l_max)
        .map(|ell| {
            let sign = if (ell + m).is_multiple_of(2) {
                1.0
            } else {
                -1.0
            };
            ell as f64 / m as f64
                * binomial(m + ell - 1, 2 * m - 1)
                * sign
                * (q_log * (ell * ell) as f64).exp()
        })
        .sum()
}

pub fn torus_coefficients(j_max: i64, l_max: usize) -> TorusSpectrum {
    let mut coefficients = BTreeMap::new();
    for j in 0..=j_max {
        for k in -j_max..=j_max {
            if canonical(j, k) != Some((j, k)) {
                continue;
            }
            for m in 1..=l_max {
                coefficients.insert((j, k, m), c_jkm(j, k, m, l_max));
            }
        }
    }
    let tail_bound = (-std::f64::consts::FRAC_PI_2 * (j_max * j_max) as f64).exp();
    TorusSpectrum {
        j_max,
        l_max,
        coefficients,
        tail_bound,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rewrite_identity() {
        for &z in &[
            C64::from_polar(1.0, 0.7),
            C64::new(1.3, -0.4),
            C64::new(-0.2, 0.9),
        ] {
            for ell in 1..=6 {
                let want = 2.0 - z.powu(ell as u32) - z.powu(ell as u32).inv();
                assert!((chebyshev_rewrite(ell, z) - want).norm() < 1e-10 * want.norm().max(1.0));
            }
        }
    }

    #[test]
    fn square_symmetry() {
        let t = torus_coefficients(4, 6);
        for m in 1..=3 {
            assert_eq!(t.coefficient(1, 2, m), t.coefficient(2, 1, m));
            assert_eq!(t.coefficient(1, 0, m), t.coefficient(0, 1, m));
            assert_eq!(t.coefficient(-1, 2, m), t.coefficient(1, -2, m));
        }
        assert_eq!(t.coefficient(2, 2, 1), 0.0);
    }

    #[test]
    fn a_single_winding_cycle_is_common() {
        let p = torus_coefficients(6, 8).probability(1, 0, 1);
        assert!((p - 0.41).abs() < 0.01, "{p}");
    }
}
