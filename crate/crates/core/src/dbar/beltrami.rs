//! Planar Beltrami equation `f_zbar = mu f_z` via the Beurling transform.

use super::{contraction_failure, DbarConfig};
use crate::error::{AcsError, Result};
use crate::grid::calculus::{dz_symbol, dzbar_symbol};
use crate::grid::{apply_multiplier, Field, LinearPart, MapField};
use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn require_planar(u: &Field, what: &str) -> Result<()> {
    if u.grid().n() != 1 || u.ncomp() != 1 {
        return Err(AcsError::DimensionMismatch(format!(
            "{what} needs a single field on a planar grid (n = {}, {} components)",
            u.grid().n(),
            u.ncomp()
        )));
    }
    Ok(())
}

/// Beurling transform: the multiplier `(k_x - i k_y) / (k_x + i k_y)`, zero
/// at the zero frequency, so that `d_z = S d_zbar` on mean-zero fields.
pub fn beurling(u: &Field) -> Result<Field> {
    require_planar(u, "beurling")?;
    apply_multiplier(u, |k| {
        if k[0] == 0 && k[1] == 0 {
            ZERO
        } else {
            Complex64::new(k[0] as f64, -(k[1] as f64)) / Complex64::new(k[0] as f64, k[1] as f64)
        }
    })
}

/// Mean-zero antiderivative in `zbar`: `d_zbar(dbar_inverse(h)) = h - mean h`.
pub fn dbar_inverse(h: &Field) -> Result<Field> {
    require_planar(h, "dbar_inverse")?;
    let w = h.grid().wavenumber();
    apply_multiplier(h, |k| {
        let s = dzbar_symbol(w, k, 0);
        if s == ZERO {
            ZERO
        } else {
            1.0 / s
        }
    })
}

#[derive(Debug, Clone)]
pub struct BeltramiSolve {
    /// `f = z + mean(h) zbar + dbar_inverse(h)`, normalised to `f(0) = 0`.
    pub f: MapField,
    /// Number of Neumann terms summed.
    pub terms: usize,
    /// Successive L² increment ratios of the series.
    pub ratios: Vec<f64>,
    /// `|f_zbar - mu f_z|_2 / |f_z|_2`.
    pub residual: f64,
}

/// Solves `h = mu (1 + S h)` by the Neumann series, then integrates
/// `f_zbar = h`. The series contracts in L² with ratio at most `sup |mu|`.
pub fn solve_beltrami(mu: &Field, cfg: &DbarConfig) -> Result<BeltramiSolve> {
    require_planar(mu, "solve_beltrami")?;
    cfg.validate()?;
    let k = mu.sup_norm();
    if k >= 1.0 {
        return Err(contraction_failure(k));
    }
    let mut h = mu.clone();
    let mut term = mu.clone();
    let mut ratios = Vec::new();
    let mut prev = term.l2_norm();
    let mut terms = 1;
    while prev > cfg.neumann_tol * h.l2_norm() {
        if terms == cfg.neumann_max_terms {
            return Err(AcsError::NoConvergence {
                iterations: terms,
                reason: format!("Neumann increment {prev:.3e} above tolerance"),
            });
        }
        term = mu.mul(&beurling(&term)?)?;
        let size = term.l2_norm();
        ratios.push(size / prev);
        h.axpy(Complex64::new(1.0, 0.0), &term)?;
        prev = size;
        terms += 1;
    }

    let grid = *mu.grid();
    let m = h.mean(0);
    let linear = LinearPart {
        n: 1,
        p: vec![Complex64::new(1.0, 0.0)],
        q: vec![m],
    };
    let f = MapField::new(linear, dbar_inverse(&h)?)?.normalized();

    // f_z = 1 + S h and f_zbar = h on the grid
    let w = grid.wavenumber();
    let fz = apply_multiplier(f.displacement(), |k| dz_symbol(w, k, 0))?
        .map(|v| v + Complex64::new(1.0, 0.0));
    let fzb = apply_multiplier(f.displacement(), |k| dzbar_symbol(w, k, 0))?.map(|v| v + m);
    let residual = fzb.sub(&mu.mul(&fz)?)?.l2_norm() / fz.l2_norm();
    Ok(BeltramiSolve {
        f,
        terms,
        ratios,
        residual,
    })
}
