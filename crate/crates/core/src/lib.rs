//! Vector-bundle Laplacians on finite graphs.
//!
//! The crate assembles line-bundle and SL₂-bundle Laplacians, evaluates their
//! determinants (LU for line bundles, Q-determinants through a Pfaffian for
//! SL₂), and relates them to weighted sums over cycle-rooted spanning forests
//! (CRSFs). Under a unitary connection the CRSF measure is determinantal with
//! the transfer-current kernel, which [`sampler`] uses for exact sampling.
//!
//! The remaining modules apply this machinery to graphs on annuli and tori
//! ([`surface`]) and to planar loop-erased random walk ([`lerw`]). The
//! [`oracle`] module holds brute-force enumerators used as ground truth.

pub mod connection;
pub mod error;
pub mod graph;
pub mod laplacian;
pub mod lerw;
pub mod linalg;
pub mod oracle;
pub mod par;
pub mod sampler;
pub mod surface;
pub mod tolerance;

pub use connection::{Connection, LineConnection, Sl2Connection, Transport};
pub use error::{Error, Result};
pub use graph::{Digraph, Graph};
pub use laplacian::{BundleLaplacian, Variant};
pub use linalg::{CMatrix, Mat2, C64};
pub use tolerance::Tolerances;
