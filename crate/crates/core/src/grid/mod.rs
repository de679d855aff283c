//! Periodic grid geometry and the spectral toolkit built on it.

pub(crate) mod calculus;
mod fft;
mod field;
pub mod interp;
pub mod io;
mod map;
mod nufft;

pub use calculus::{
    apply_multiplier, d_z, d_zbar, inv_laplacian, laplacian, partial, refine, resample_dilate,
    Spectrum,
};
pub use field::Field;
pub use interp::{interpolate, InterpConfig, InterpMethod, Interpolator};
pub use map::spectral_norm;
pub use map::{compose, compose_map, invert_map, LinearPart, MapDerivatives, MapField};

use crate::error::{AcsError, Result};
use serde::{Deserialize, Serialize};

/// Uniform periodic grid over `R^{2n}` with `size` samples per real axis.
///
/// Nodes sit at `i * period / size`; the origin is node 0. Axis order is
/// `(x_1, y_1, ..., x_n, y_n)`, last axis fastest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
    size: usize,
    period: f64,
}

impl Grid {
    pub fn new(n: usize, size: usize, period: f64) -> Result<Self> {
        if !(1..=2).contains(&n) {
            return Err(AcsError::InvalidParameter(format!(
                "complex dimension must be 1 or 2, got {n}"
            )));
        }
        if size < 8 || !size.is_power_of_two() {
            return Err(AcsError::InvalidParameter(format!(
                "samples per axis must be a power of two >= 8, got {size}"
            )));
        }
        if !(period > 0.0 && period.is_finite()) {
            return Err(AcsError::InvalidParameter(format!(
                "period must be positive, got {period}"
            )));
        }
        Ok(Self { n, size, period })
    }

    /// Complex dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Samples per real axis.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Real dimension `m = 2n`.
    pub fn dim(&self) -> usize {
        2 * self.n
    }

    /// Total number of grid points, `size^(2n)`.
    pub fn len(&self) -> usize {
        self.size.pow(self.dim() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.size as f64
    }

    /// Largest Littlewood-Paley index, `log2(N/2)`.
    pub fn k_max(&self) -> i32 {
        (self.size / 2).trailing_zeros() as i32
    }

    /// Per-axis indices of flat index `idx`.
    #[inline]
    pub fn digits(&self, mut idx: usize, out: &mut [usize]) {
        let m = self.dim();
        for a in (0..m).rev() {
            out[a] = idx % self.size;
            idx /= self.size;
        }
    }

    /// Signed integer frequency of FFT bin `i` (the unpaired bin maps to `-N/2`).
    #[inline]
    pub fn freq(&self, i: usize) -> i64 {
        if i < self.size / 2 {
            i as i64
        } else {
            i as i64 - self.size as i64
        }
    }

    /// Coordinate of node index `i` wrapped into `[-L/2, L/2)`.
    #[inline]
    pub fn wrapped(&self, i: usize) -> f64 {
        let s = self.freq(i) as f64;
        s * self.spacing()
    }

    /// Node coordinates wrapped into the box centred at the origin.
    pub fn wrapped_coords(&self, idx: usize, out: &mut [f64]) {
        let mut d = [0usize; 4];
        self.digits(idx, &mut d[..self.dim()]);
        for a in 0..self.dim() {
            out[a] = self.wrapped(d[a]);
        }
    }

    /// Euclidean distance from the origin measured in wrapped coordinates.
    pub fn radius(&self, idx: usize) -> f64 {
        let mut x = [0.0; 4];
        self.wrapped_coords(idx, &mut x[..self.dim()]);
        x[..self.dim()].iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Fundamental wavenumber `2 pi / L`.
    pub fn wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.period
    }

    pub fn check_same(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(AcsError::GridMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }
}

/// Validating constructor mirroring [`Grid::new`].
pub fn make_grid(n: usize, size: usize, period: f64) -> Result<Grid> {
    Grid::new(n, size, period)
}
