//! Spectral (trigonometric) interpolation of periodic fields at scattered points.
//!
//! Two routes evaluate the same interpolant: direct summation over all Fourier
//! modes, exact but `O(N^m)` per point, and a non-uniform FFT whose cost per
//! point is bounded by the kernel support. The unpaired Nyquist mode is split
//! symmetrically so real data interpolates to real values.

use super::calculus::Spectrum;
use super::nufft::Nufft;
use super::{Field, Grid};
use crate::error::{AcsError, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InterpMethod {
    Direct,
    Nufft,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterpConfig {
    /// Target accuracy of the NUFFT route relative to the coefficient mass.
    pub tol: f64,
    /// Use direct summation while `points * N^m` stays below this.
    pub direct_threshold: f64,
}

impl Default for InterpConfig {
    fn default() -> Self {
        Self {
            tol: 1e-13,
            direct_threshold: 2e7,
        }
    }
}

impl InterpConfig {
    /// Defaults sized for the grid dimension: the 4D kernel costs `w^4` per point.
    pub fn for_grid(grid: &Grid) -> Self {
        let tol = if grid.dim() == 2 { 1e-13 } else { 1e-10 };
        Self {
            tol,
            ..Self::default()
        }
    }

    pub fn method_for(&self, grid: &Grid, npoints: usize) -> InterpMethod {
        if (npoints as f64) * (grid.len() as f64) <= self.direct_threshold {
            InterpMethod::Direct
        } else {
            InterpMethod::Nufft
        }
    }
}

enum Backend {
    Direct(Vec<Vec<Complex64>>),
    Nufft(Nufft),
}

/// Reusable evaluator for the trigonometric interpolant of a field.
pub struct Interpolator {
    grid: Grid,
    ncomp: usize,
    backend: Backend,
}

impl Interpolator {
    pub fn new(u: &Field, method: InterpMethod, cfg: &InterpConfig) -> Self {
        let grid = *u.grid();
        let spec = Spectrum::of(u).normalized();
        let coeffs: Vec<Vec<Complex64>> = spec.chunks(grid.len()).map(|c| c.to_vec()).collect();
        let backend = match method {
            InterpMethod::Direct => Backend::Direct(coeffs),
            InterpMethod::Nufft => Backend::Nufft(Nufft::new(&grid, &coeffs, cfg.tol)),
        };
        Self {
            grid,
            ncomp: u.ncomp(),
            backend,
        }
    }

    /// Picks the route from the expected number of evaluation points.
    pub fn auto(u: &Field, npoints: usize, cfg: &InterpConfig) -> Self {
        Self::new(u, cfg.method_for(u.grid(), npoints), cfg)
    }

    pub fn ncomp(&self) -> usize {
        self.ncomp
    }

    /// Evaluates all components at `points` (flattened, `2n` coordinates each).
    /// Output is component-major: `out[c * npts + p]`.
    pub fn eval(&self, points: &[f64]) -> Result<Vec<Complex64>> {
        let m = self.grid.dim();
        if points.len() % m != 0 {
            return Err(AcsError::DimensionMismatch(format!(
                "point buffer length {} is not a multiple of {m}",
                points.len()
            )));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(AcsError::NonFinite("interpolation point".into()));
        }
        let npts = points.len() / m;
        let per_point: Vec<Vec<Complex64>> = points
            .par_chunks(m)
            .map(|x| {
                let mut out = vec![Complex64::new(0.0, 0.0); self.ncomp];
                match &self.backend {
                    Backend::Direct(coeffs) => direct_eval(&self.grid, coeffs, x, &mut out),
                    Backend::Nufft(nu) => nu.eval_point(x, &mut out),
                }
                out
            })
            .collect();
        let mut out = vec![Complex64::new(0.0, 0.0); self.ncomp * npts];
        for (p, vals) in per_point.iter().enumerate() {
            for (c, v) in vals.iter().enumerate() {
                out[c * npts + p] = *v;
            }
        }
        Ok(out)
    }
}

fn direct_eval(grid: &Grid, coeffs: &[Vec<Complex64>], x: &[f64], out: &mut [Complex64]) {
    let size = grid.size();
    let m = grid.dim();
    let exps: Vec<Vec<Complex64>> = (0..m)
        .map(|a| {
            let theta = 2.0 * PI * x[a] / grid.period();
            (0..size)
                .map(|b| {
                    let k = grid.freq(b);
                    if k == -(size as i64) / 2 {
                        Complex64::new((k as f64 * theta).cos(), 0.0)
                    } else {
                        Complex64::from_polar(1.0, k as f64 * theta)
                    }
                })
                .collect()
        })
        .collect();
    for (o, c) in out.iter_mut().zip(coeffs) {
        // contract the last axis first
        let mut cur: Vec<Complex64> = c.clone();
        for a in (0..m).rev() {
            let e = &exps[a];
            cur = cur
                .chunks(size)
                .map(|row| row.iter().zip(e).map(|(v, w)| v * w).sum())
                .collect();
        }
        *o = cur[0];
    }
}

/// Values of the trigonometric interpolant of every component of `u` at
/// `points` (flattened physical coordinates, wrapped mod `L`), component-major.
pub fn interpolate(u: &Field, points: &[f64], cfg: &InterpConfig) -> Result<Vec<Complex64>> {
    let npts = points.len() / u.grid().dim().max(1);
    Interpolator::auto(u, npts, cfg).eval(points)
}
