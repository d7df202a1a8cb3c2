use super::{CMatrix, C64};
use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

/// Pfaffian of an antisymmetric matrix by Parlett–Reid elimination.
///
/// Each step pivots the largest entry of the current column into the
/// super-diagonal slot, then eliminates with a skew rank-2 update, so the cost
/// is O(n³) like LU.
pub fn pfaffian(m: &CMatrix) -> Result<C64> {
    pfaffian_with(m, &Tolerances::DEFAULT)
}

pub fn pfaffian_with(m: &CMatrix, tol: &Tolerances) -> Result<C64> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    if n % 2 == 1 {
        return Err(Error::OddDimension(n));
    }
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    let mut deviation: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            deviation = deviation.max((m[(i, j)] + m[(j, i)]).norm());
        }
    }
    if deviation > tol.antisymmetry * scale.max(1.0) {
        return Err(Error::NotAntisymmetric { deviation });
    }

    let mut a = m.clone();
    let mut pf = C64::new(1.0, 0.0);
    let mut k = 0;
    while k + 1 < n {
        let (kp, best) = (k + 1..n)
            .map(|i| (i, a[(i, k)].norm()))
            .fold((k + 1, -1.0), |b, c| if c.1 > b.1 { c } else { b });
        if best <= tol.pivot * scale {
            return Ok(C64::new(0.0, 0.0));
        }
        if kp != k + 1 {
            for j in 0..n {
                let t = a[(k + 1, j)];
                a[(k + 1, j)] = a[(kp, j)];
                a[(kp, j)] = t;
            }
            for i in 0..n {
                let t = a[(i, k + 1)];
                a[(i, k + 1)] = a[(i, kp)];
                a[(i, kp)] = t;
            }
            pf = -pf;
        }
        let piv = a[(k, k + 1)];
        pf *= piv;
        if k + 2 < n {
            let tau: Vec<C64> = (k + 2..n).map(|j| a[(k, j)] / piv).collect();
            let col: Vec<C64> = (k + 2..n).map(|i| a[(i, k + 1)]).collect();
            for (ii, i) in (k + 2..n).enumerate() {
                for (jj, j) in (k + 2..n).enumerate() {
                    let upd = tau[ii] * col[jj] - col[ii] * tau[jj];
                    a[(i, j)] += upd;
                }
            }
        }
        k += 2;
    }
    Ok(pf)
}
