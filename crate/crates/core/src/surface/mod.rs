//! Analyses on surface presets: annulus spectra, torus coefficients, `G × Z_n`
//! product formulas and monotone lattice paths.

pub mod annulus;
pub mod lattice;
pub mod product;
pub mod torus;

pub use annulus::{
    annulus_spectrum, annulus_spectrum_preset, bernoulli_convolution, ch, cylinder_multipliers,
    limit_single_cycle_probability, AnnulusSpectrum,
};
pub use lattice::{lattice_path_pgf, monotone_coefficients, LatticePathPgf};
pub use product::{product_formula_cylinder, ProductReport};
pub use torus::{torus_coefficients, TorusSpectrum};
