//! North/east configurations on the `m × n` torus: the generating function
//! `F_{m,n}(z, w) = ∏_{uᵐ=z} ∏_{vⁿ=w} (2 - u - v)` and its cycle statistics.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::directed_torus;
use crate::laplacian::directed_matrix;
use crate::linalg::{roots_of_unity, BivariateLaurent, C64};
use crate::oracle::binomial;
use crate::par::*;

/// `F_{m,n}(z, w)`, accumulated as a sum of logarithms.
pub fn lattice_f(m: usize, n: usize, z: C64, w: C64) -> C64 {
    let us: Vec<C64> = roots_of_unity(m)
        .into_iter()
        .map(|r| r * (z.ln() / m as f64).exp())
        .collect();
    let vs: Vec<C64> = roots_of_unity(n)
        .into_iter()
        .map(|r| r * (w.ln() / n as f64).exp())
        .collect();
    let mut log = C64::new(0.0, 0.0);
    for u in &us {
        for v in &vs {
            let f = 2.0 - u - v;
            if f.norm() == 0.0 {
                return C64::new(0.0, 0.0);
            }
            log += f.ln();
        }
    }
    log.exp()
}

/// `det Δ` of the directed torus with `z` on east-wrapping and `w` on
/// north-wrapping arcs.
pub fn directed_torus_det(m: usize, n: usize, z: C64, w: C64) -> Result<C64> {
    let t = directed_torus(m, n)?;
    let mut tr = vec![C64::new(1.0, 0.0); t.digraph.arcs().len()];
    for &a in &t.east_wrap {
        tr[a] *= z;
    }
    for &a in &t.north_wrap {
        tr[a] *= w;
    }
    directed_matrix(&t.digraph, &tr)?.det()
}

/// `C_{j,k}` read off `F` by bivariate interpolation.
#[derive(Debug, Clone)]
pub struct MonotoneCoefficients {
    pub counts: BTreeMap<(i64, i64), u64>,
    /// Largest distance from a recovered coefficient to the nearest integer.
    pub rounding: f64,
    /// Relative interpolation residual.
    pub residual: f64,
}

/// Solves `F = Σ C_{j,k} (1 - z^p w^q)^ℓ`, `(j, k) = ℓ (p, q)`, from the
/// monomial coefficients of `F`, one primitive direction at a time.
pub fn monotone_coefficients(m: usize, n: usize) -> Result<MonotoneCoefficients> {
    if m * n > 10_000 {
        return Err(Error::Guard {
            what: "torus cells",
            count: (m * n) as f64,
            limit: 1e4,
        });
    }
    // Degree n in z (one east wrap per row) and m in w.
    let interp = BivariateLaurent::interpolate(
        |z, w| Ok(lattice_f(m, n, z, w)),
        (0, n as i64),
        (0, m as i64),
    )?;
    let f = interp.poly;
    let mut counts = BTreeMap::new();
    let mut rounding: f64 = 0.0;
    let (jn, kn) = (n as i64, m as i64);
    for p in 0..=jn {
        for q in 0..=kn {
            if (p, q) == (0, 0) || gcd(p, q) != 1 {
                continue;
            }
            let top = (if p == 0 { i64::MAX } else { jn / p }).min(if q == 0 {
                i64::MAX
            } else {
                kn / q
            }) as usize;
            // a_ℓ = Σ_{ℓ' ≥ ℓ} C_{ℓ'} C(ℓ', ℓ) (-1)^ℓ, solved from the top.
            let mut c = vec![0.0; top + 1];
            for ell in (1..=top).rev() {
                let a = f.coeff(ell as i64 * p, ell as i64 * q).re;
                let sign = if ell % 2 == 0 { 1.0 } else { -1.0 };
                let higher: f64 = (ell + 1..=top).map(|l2| c[l2] * binomial(l2, ell)).sum();
                c[ell] = a * sign - higher;
            }
            for (ell, &v) in c.iter().enumerate().skip(1) {
                let r = v.round();
                rounding = rounding.max((v - r).abs());
                if r != 0.0 {
                    counts.insert((ell as i64 * p, ell as i64 * q), r as u64);
                }
            }
        }
    }
    Ok(MonotoneCoefficients {
        counts,
        rounding,
        residual: interp.residual,
    })
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Law of the number of `(1, 1)` cycles on the `n × n` torus, with the
/// off-diagonal classes dropped.
#[derive(Debug, Clone)]
pub struct LatticePathPgf {
    pub n: usize,
    /// `1/a_j` with `a_j = (2 - e^{2πij/n})ⁿ`, `j = 0..n`.
    pub inverse_factors: Vec<C64>,
    /// Ascending coefficients of `H_n(1, Y) / H_n(1, 1)`. This still carries
    /// the off-diagonal classes, so small negative entries can appear.
    pub exact_series: Vec<f64>,
    /// `∏_j (1 - p_j + p_j Y)` over the limit biases: the cycle-count PGF.
    pub pgf: Vec<f64>,
    pub mean: f64,
    pub variance: f64,
    /// Gaussian-limit biases `p_j = e^{-(2πj)²/n}`, `j ∈ Z`, truncated where negligible.
    pub limit_biases: Vec<f64>,
    pub limit_mean: f64,
    pub limit_variance: f64,
}

impl LatticePathPgf {
    /// `√(n/4π)`.
    pub fn asymptotic_mean(&self) -> f64 {
        (self.n as f64 / (4.0 * std::f64::consts::PI)).sqrt()
    }

    /// `√(n/4π) (1 - 1/√2)`.
    pub fn asymptotic_variance(&self) -> f64 {
        self.asymptotic_mean() * (1.0 - 1.0 / 2f64.sqrt())
    }

    pub fn pgf_sum(&self) -> f64 {
        self.pgf.iter().sum()
    }

    pub fn min_coefficient(&self) -> f64 {
        self.pgf.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// `H_n(1, Y)/H_n(1, 1) = ∏_j (a_j - 1 + Y)/a_j`.
pub fn lattice_path_pgf(n: usize) -> Result<LatticePathPgf> {
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    let inverse_factors: Vec<C64> = (0..n)
        .into_par_iter()
        .map(|j| {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
            let base = 2.0 - C64::from_polar(1.0, theta);
            (-(base.ln() * n as f64)).exp()
        })
        .collect();
    let mut poly = vec![C64::new(1.0, 0.0)];
    for &b in &inverse_factors {
        // Factors with |b| below machine precision are 1 to double accuracy.
        if b.norm() < 1e-18 {
            continue;
        }
        let mut next = vec![C64::new(0.0, 0.0); poly.len() + 1];
        for (i, &c) in poly.iter().enumerate() {
            next[i] += c * (1.0 - b);
            next[i + 1] += c * b;
        }
        poly = next;
    }
    let exact_series: Vec<f64> = poly.iter().map(|c| c.re).collect();
    let mean = inverse_factors.iter().map(|b| b.re).sum();
    let variance = inverse_factors.iter().map(|b| (b - b * b).re).sum();
    let cutoff = (n as f64).sqrt() as i64 * 4 + 4;
    let limit_biases: Vec<f64> = (-cutoff..=cutoff)
        .map(|j| (-(2.0 * std::f64::consts::PI * j as f64).powi(2) / n as f64).exp())
        .collect();
    let limit_mean = limit_biases.iter().sum();
    let limit_variance = limit_biases.iter().map(|p| p * (1.0 - p)).sum();
    let mut pgf = vec![1.0];
    for &p in &limit_biases {
        let mut next = vec![0.0; pgf.len() + 1];
        for (i, &c) in pgf.iter().enumerate() {
            next[i] += c * (1.0 - p);
            next[i + 1] += c * p;
        }
        pgf = next;
    }
    while pgf.len() > 1 && *pgf.last().unwrap() == 0.0 {
        pgf.pop();
    }
    Ok(LatticePathPgf {
        n,
        inverse_factors,
        exact_series,
        pgf,
        mean,
        variance,
        limit_biases,
        limit_mean,
        limit_variance,
    })
}
