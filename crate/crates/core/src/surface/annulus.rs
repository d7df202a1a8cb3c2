//! Monodromy polynomials of annulus graphs and the cycle-count law of
//! incompressible CRSFs.

use nalgebra::{DMatrix, DVector};

use crate::connection::LineConnection;
use crate::error::{Error, Result};
use crate::graph::{DirEdge, Graph, Preset};
use crate::laplacian::{BundleLaplacian, Variant};
use crate::linalg::{interpolate_on_circle, LaurentPoly, Poly, C64};
use crate::par::*;
use crate::tolerance::Tolerances;

/// `Ch_n(α + 1/α) = αⁿ + α⁻ⁿ`.
pub fn ch(n: usize, x: f64) -> f64 {
    if x.abs() <= 2.0 {
        2.0 * (n as f64 * (x / 2.0).acos()).cos()
    } else {
        let a = (x.abs() + (x * x - 4.0).sqrt()) / 2.0;
        let v = a.powi(n as i32) + a.powi(-(n as i32));
        if x < 0.0 && n % 2 == 1 {
            -v
        } else {
            v
        }
    }
}

/// Spectrum of `P(z) = det Δ(z)` for a graph on an annulus, where `z` is the
/// transport multiplier on the winding generator.
#[derive(Debug, Clone)]
pub struct AnnulusSpectrum {
    /// `P(z)` as a Laurent polynomial.
    pub p: LaurentPoly,
    /// Relative interpolation residual of `P`.
    pub p_residual: f64,
    /// `Q(w) = P(z)` with `w = 2 - z - 1/z`, ascending coefficients.
    pub q: Poly,
    /// Relative least-squares residual of `Q`.
    pub q_residual: f64,
    /// `λ_1 < … < λ_k`, so `Q(w) ∝ w ∏ (w + λ_i)`.
    pub multipliers: Vec<f64>,
    /// `k + 1`, the maximal number of disjoint winding cycles.
    pub capacity: usize,
}

impl AnnulusSpectrum {
    /// Roots of `Q`: `0, -λ_1, …, -λ_k`.
    pub fn q_roots(&self) -> Vec<f64> {
        std::iter::once(0.0)
            .chain(self.multipliers.iter().map(|l| -l))
            .collect()
    }

    /// The real roots `r > 1` of `P`, one per multiplier (their reciprocals are roots too).
    pub fn z_roots(&self) -> Vec<f64> {
        self.multipliers.iter().map(|&l| z_of(l)).collect()
    }

    /// Probability that the `i`-th Bernoulli summand adds a cycle: `1 / (1 + λ_i)`.
    pub fn extra_cycle_probabilities(&self) -> Vec<f64> {
        self.multipliers.iter().map(|l| 1.0 / (1.0 + l)).collect()
    }

    /// `Q(w)/Q(1)` read from the interpolated `Q`; entry `j` is `Pr(j cycles)`.
    pub fn cycle_count_pgf(&self) -> Vec<f64> {
        let total: f64 = self.q.coeffs().iter().sum();
        self.q.coeffs().iter().map(|c| c / total).collect()
    }

    /// `w ∏ (w + λ_i)/(1 + λ_i)`, the law of one plus independent Bernoullis.
    pub fn bernoulli_pgf(&self) -> Vec<f64> {
        bernoulli_convolution(&self.multipliers)
    }

    pub fn single_cycle_probability(&self) -> f64 {
        self.multipliers.iter().map(|l| l / (1.0 + l)).product()
    }

    pub fn reciprocity_defect(&self) -> f64 {
        self.p.reciprocity_defect() / self.p.max_abs().max(f64::MIN_POSITIVE)
    }

    /// `|P(1)|` and `|P'(1)|` relative to the largest coefficient.
    pub fn double_root_defect(&self) -> (f64, f64) {
        let one = C64::new(1.0, 0.0);
        let s = self.p.max_abs().max(f64::MIN_POSITIVE);
        (
            self.p.eval(one).norm() / s,
            self.p.derivative().eval(one).norm() / s,
        )
    }

    /// Smallest relative gap between consecutive multipliers.
    pub fn min_relative_gap(&self) -> f64 {
        self.multipliers
            .windows(2)
            .map(|w| (w[1] - w[0]) / w[1])
            .fold(f64::INFINITY, f64::min)
    }
}

/// `w ∏ (w + λ_i)/(1 + λ_i)` as ascending coefficients.
pub fn bernoulli_convolution(multipliers: &[f64]) -> Vec<f64> {
    let mut pgf = vec![0.0, 1.0];
    for &l in multipliers {
        let (stay, add) = (l / (1.0 + l), 1.0 / (1.0 + l));
        let mut next = vec![0.0; pgf.len() + 1];
        for (j, &c) in pgf.iter().enumerate() {
            next[j] += c * stay;
            next[j + 1] += c * add;
        }
        pgf = next;
    }
    pgf
}

/// Root `z > 1` of `z + 1/z = 2 + s`.
fn z_of(s: f64) -> f64 {
    let x = 2.0 + s;
    (x + (x * x - 4.0).sqrt()) / 2.0
}

/// The monodromy-dependent Laplacian of an annulus graph.
struct Winding<'a> {
    g: &'a Graph,
    darts: &'a [DirEdge],
    variant: Variant,
    tol: Tolerances,
}

impl Winding<'_> {
    fn lap(&self, z: C64) -> Result<BundleLaplacian> {
        let conn = LineConnection::with_darts(self.g.m(), self.darts, z);
        BundleLaplacian::line_with(self.g, &conn, self.variant, self.tol)
    }

    fn det(&self, z: C64) -> Result<C64> {
        self.lap(z)?.det()
    }

    /// Sign of `Q(-s)`, evaluated as `det Δ` at the real monodromy `z(s)`.
    fn sign_at(&self, s: f64) -> Result<f64> {
        let lap = self.lap(C64::new(z_of(s), 0.0))?;
        let (_, phase) = lap.matrix().balanced()?.lu_with(&self.tol)?.log_det();
        Ok(phase.re.signum())
    }
}

/// Interpolates `P`, fits `Q` and locates every multiplier on the real axis.
///
/// `capacity` must be the maximal number of disjoint cycles winding around
/// the annulus; it bounds the Laurent degree of `P` and fixes how many
/// multipliers are sought.
pub fn annulus_spectrum(
    g: &Graph,
    darts: &[DirEdge],
    capacity: usize,
    variant: Variant,
    tol: Tolerances,
) -> Result<AnnulusSpectrum> {
    if capacity == 0 {
        return Err(Error::invalid("winding capacity must be at least 1"));
    }
    let wind = Winding {
        g,
        darts,
        variant,
        tol,
    };
    let interp = interpolate_on_circle(|z| wind.det(z), capacity, 2)?;
    let p = interp.poly;

    // Q on Chebyshev nodes of w ∈ [0, 4], where z = e^{iθ} with w = 2 - 2cos θ.
    let nodes = 2 * capacity + 4;
    let ws: Vec<f64> = (0..nodes)
        .map(|i| 2.0 + 2.0 * (std::f64::consts::PI * (i as f64 + 0.5) / nodes as f64).cos())
        .collect();
    let values: Vec<Result<f64>> = ws
        .par_iter()
        .map(|&w| {
            let theta = (1.0 - w / 2.0).clamp(-1.0, 1.0).acos();
            wind.det(C64::from_polar(1.0, theta)).map(|d| d.re)
        })
        .collect();
    let values: Vec<f64> = values.into_iter().collect::<Result<_>>()?;
    let (q, q_residual) = chebyshev_fit(&ws, &values, capacity)?;

    let multipliers = scan_multipliers(&wind, capacity - 1).map_err(|e| match e {
        Error::Numerical(_) => complex_root_error(&q).unwrap_or(e),
        other => other,
    })?;
    Ok(AnnulusSpectrum {
        p,
        p_residual: interp.residual,
        q,
        q_residual,
        multipliers,
        capacity,
    })
}

/// Spectrum for an annulus preset, using its first generator and known capacity.
pub fn annulus_spectrum_preset(p: &Preset, variant: Variant) -> Result<AnnulusSpectrum> {
    let cap = p.winding_capacity().ok_or_else(|| {
        Error::invalid("preset has no known winding capacity; pass it explicitly")
    })?;
    let gen = p
        .generators
        .first()
        .ok_or_else(|| Error::invalid("preset has no winding generator"))?;
    annulus_spectrum(&p.graph, &gen.darts, cap, variant, Tolerances::DEFAULT)
}

fn complex_root_error(q: &Poly) -> Option<Error> {
    q.roots()
        .into_iter()
        .max_by(|a, b| a.im.abs().partial_cmp(&b.im.abs()).unwrap())
        .filter(|r| r.im.abs() > 0.0)
        .map(|r| Error::ComplexRoot { re: r.re, im: r.im })
}

/// Least squares in the Chebyshev basis of `[0, 4]`, converted to powers of `w`.
fn chebyshev_fit(ws: &[f64], values: &[f64], degree: usize) -> Result<(Poly, f64)> {
    let cheb = |x: f64| {
        let mut t = vec![1.0, x];
        while t.len() <= degree {
            let k = t.len();
            t.push(2.0 * x * t[k - 1] - t[k - 2]);
        }
        t.truncate(degree + 1);
        t
    };
    let scale = values.iter().fold(f64::MIN_POSITIVE, |a, v| a.max(v.abs()));
    let a = DMatrix::from_fn(ws.len(), degree + 1, |i, k| cheb((ws[i] - 2.0) / 2.0)[k]);
    let b = DVector::from_iterator(values.len(), values.iter().map(|v| v / scale));
    let coef = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::Numerical(format!("Chebyshev least squares: {e}")))?;
    let residual = (&a * &coef - &b).amax();
    // T_k((w - 2)/2) in powers of w.
    let x = Poly::new(vec![-1.0, 0.5]);
    let mut t = vec![Poly::new(vec![1.0]), x.clone()];
    while t.len() <= degree {
        let k = t.len();
        let next = add(&x.mul(&t[k - 1]).scale(2.0), &t[k - 2].scale(-1.0));
        t.push(next);
    }
    let mut q = Poly::new(vec![0.0]);
    for k in 0..=degree {
        q = add(&q, &t[k].scale(coef[k] * scale));
    }
    Ok((q, residual))
}

fn add(a: &Poly, b: &Poly) -> Poly {
    let n = a.coeffs().len().max(b.coeffs().len());
    Poly::new(
        (0..n)
            .map(|i| a.coeffs().get(i).unwrap_or(&0.0) + b.coeffs().get(i).unwrap_or(&0.0))
            .collect(),
    )
}

// Below this the smallest eigenvalue of Δ(z(s)) is within a few hundred ulps
// of ‖Δ‖ and the determinant sign is noise.
const SCAN_MIN: f64 = 1e-8;
const SCAN_MAX: f64 = 1e280;
const PER_DECADE: usize = 24;

/// Finds `k` sign changes of `Q(-s)` for `s` on a geometric grid, then
/// bisects each bracket in `log s` down to machine precision.
fn scan_multipliers(wind: &Winding<'_>, k: usize) -> Result<Vec<f64>> {
    if k == 0 {
        return Ok(Vec::new());
    }
    let mut found = Vec::new();
    let step = 10f64.powf(1.0 / PER_DECADE as f64);
    let mut s = SCAN_MIN;
    // Q(w) = c w ∏ (w + λ_i) with c > 0, so Q(-s) < 0 below the first multiplier.
    let mut sign = wind.sign_at(s)?;
    if sign >= 0.0 {
        return Err(Error::Numerical(format!(
            "det Δ is not negative at s = {SCAN_MIN:e}: a multiplier is below the scan range or the sign is unresolved"
        )));
    }
    while found.len() < k {
        // One decade at a time, evaluated in parallel.
        let grid: Vec<f64> = (1..=PER_DECADE).map(|i| s * step.powi(i as i32)).collect();
        let signs: Vec<Result<f64>> = grid.par_iter().map(|&x| wind.sign_at(x)).collect();
        let mut lo = s;
        for (x, sg) in grid.iter().zip(signs) {
            let sg = sg?;
            if sg != sign && sg != 0.0 {
                found.push(bisect(wind, lo, *x, sign)?);
                sign = sg;
            }
            lo = *x;
        }
        s = *grid.last().unwrap();
        if s > SCAN_MAX {
            return Err(Error::Numerical(format!(
                "found {} of {} real multipliers; the rest are complex, coincident or beyond range",
                found.len(),
                k
            )));
        }
    }
    if found.len() > k {
        return Err(Error::invalid(format!(
            "found {} multipliers but capacity allows {k}",
            found.len()
        )));
    }
    Ok(found)
}

fn bisect(wind: &Winding<'_>, mut lo: f64, mut hi: f64, lo_sign: f64) -> Result<f64> {
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if wind.sign_at(mid)? == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo * hi).sqrt())
}

/// Multipliers of the unit-conductance cylinder `G_m × Z_n`:
/// `Ch_n(μ + 2) - 2` over the nonzero path eigenvalues `μ = 2 - 2cos(kπ/m)`.
pub fn cylinder_multipliers(m: usize, n: usize) -> Vec<f64> {
    let mut l: Vec<f64> = (1..m)
        .map(|k| {
            ch(
                n,
                4.0 - 2.0 * (k as f64 * std::f64::consts::PI / m as f64).cos(),
            ) - 2.0
        })
        .collect();
    l.sort_by(|a, b| a.partial_cmp(b).unwrap());
    l
}

/// `∏_{j ≤ terms} (2cosh(πj/τ) - 2)/(2cosh(πj/τ) - 1)`: the single-cycle
/// probability of the scaling limit with aspect ratio `τ = m/n`.
pub fn limit_single_cycle_probability(tau: f64, terms: usize) -> f64 {
    (1..=terms)
        .map(|j| {
            let c = 2.0 * (std::f64::consts::PI * j as f64 / tau).cosh();
            (c - 2.0) / (c - 1.0)
        })
        .product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{chain_of_loops, cycle, cylinder};

    #[test]
    fn ch_matches_definition() {
        for &a in &[1.0f64, 1.5, 3.0] {
            for n in 0..6 {
                let want = a.powi(n) + a.powi(-n);
                assert!((ch(n as usize, a + 1.0 / a) - want).abs() < 1e-12 * want);
            }
        }
        assert!((ch(3, 1.0) - 2.0 * (3.0 * (0.5f64).acos()).cos()).abs() < 1e-14);
    }

    #[test]
    fn single_cycle_has_no_multipliers() {
        let s = annulus_spectrum(
            &cycle(5).unwrap().graph,
            &cycle(5).unwrap().generators[0].darts,
            1,
            Variant::Standard,
            Tolerances::DEFAULT,
        )
        .unwrap();
        assert!(s.multipliers.is_empty());
        assert!((s.p.coeff(0).re - 2.0).abs() < 1e-12 && (s.p.coeff(1).re + 1.0).abs() < 1e-12);
        let pgf = s.cycle_count_pgf();
        assert!((pgf[1] - 1.0).abs() < 1e-12 && pgf[0].abs() < 1e-12);
    }

    #[test]
    fn cylinder_matches_closed_form() {
        let p = cylinder(3, 5).unwrap();
        let s = annulus_spectrum_preset(&p, Variant::Standard).unwrap();
        let want = cylinder_multipliers(3, 5);
        for (a, b) in s.multipliers.iter().zip(&want) {
            assert!((a - b).abs() < 1e-9 * b, "{a} vs {b}");
        }
        assert!(s.reciprocity_defect() < 1e-12);
        let (d0, d1) = s.double_root_defect();
        assert!(d0 < 1e-10 && d1 < 1e-10);
        for (a, b) in s.cycle_count_pgf().iter().zip(s.bernoulli_pgf()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn uneven_conductances_keep_scan_start_clean() {
        // this draw gave a spurious sign change at s ~ 1e-12 before the scan start was raised
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(505);
        let p = cylinder(4, 8).unwrap();
        let edges: Vec<_> = p
            .graph
            .edges()
            .iter()
            .map(|e| (e.tail, e.head, rng.random_range(0.2..5.0)))
            .collect();
        let g = Graph::from_edges(p.graph.n(), &edges).unwrap();
        let s = annulus_spectrum(
            &g,
            &p.generators[0].darts,
            4,
            Variant::Weighted,
            Tolerances::DEFAULT,
        )
        .unwrap();
        assert!(s.multipliers[0] > 1.0, "{:?}", s.multipliers);
        for (a, b) in s.cycle_count_pgf().iter().zip(s.bernoulli_pgf()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn chain_of_loops_roots_are_distinct() {
        let p = chain_of_loops(4).unwrap();
        let s = annulus_spectrum_preset(&p, Variant::Standard).unwrap();
        assert_eq!(s.multipliers.len(), 3);
        assert!(s.min_relative_gap() > 1e-3);
        for (a, b) in s.cycle_count_pgf().iter().zip(s.bernoulli_pgf()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn limit_product() {
        let p = limit_single_cycle_probability(1.0, 20);
        assert!((p - 0.9531).abs() < 1e-3, "{p}");
    }
}
