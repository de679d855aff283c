//! Numerical toolkit for rough almost complex structures on a periodic box.
//!
//! The crate is organised bottom-up:
//!
//! * [`grid`]: periodic grids, fields, Fourier calculus, spectral interpolation,
//!   maps stored as linear part plus periodic displacement, and the ACSF container.
//! * [`spaces`]: Littlewood-Paley blocks, Bony paraproducts, Zygmund / Sobolev /
//!   bmo norm estimators and regularity profiles.
//! * [`acs`]: almost complex structures, Beltrami matrices, the Nijenhuis tensor
//!   and the integrability residual, plus test-structure generators.
//! * [`malgrange`]: the `F = G o H` factorization engine (the `H` half).
//! * [`dbar`]: the `G` half, the planar Beltrami oracle and chart comparison.

pub mod acs;
pub mod dbar;
pub mod error;
pub mod grid;
pub mod malgrange;
pub mod pipeline;
pub mod rng;
pub mod spaces;

pub use error::{AcsError, Result};
pub use grid::{Field, Grid, MapField};
pub use num_complex::Complex64;
