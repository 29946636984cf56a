//! Independent desk-scale oracles for the asymptotic statements: spectra
//! with known Weyl constants, Mellin-integral matrix powers and a discrete
//! sublaplacian on the integer Heisenberg nilmanifold.

pub mod mellin;
pub mod nilmanifold;
pub mod spectrum;

pub use mellin::{mellin_power, mellin_power_real, MatrixOperator, MellinParams};
pub use nilmanifold::{nilmanifold_spectrum, NilmanifoldGrid};
pub use spectrum::{
    counting_function, heat_trace, median_weyl_ratio, synthetic_spectrum, Spectrum,
};
