//! Dense complex linear algebra used by every other module.

mod laurent;
mod matrix;
mod pfaffian;
mod qdet;
mod roots;

pub use laurent::{
    interpolate_laurent, interpolate_on_circle, roots_of_unity, BivariateLaurent, Interpolated,
    LaurentPoly,
};
pub use matrix::{CMatrix, Lu};
pub use pfaffian::pfaffian;
pub use qdet::{qdet_cycle_expansion, Mat2, SelfDualMatrix};
pub use roots::Poly;

pub type C64 = num_complex::Complex<f64>;

/// Relative distance `|a - b| / max(|a|, |b|, floor)`.
pub fn rel_err(a: C64, b: C64, floor: f64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(floor)
}
