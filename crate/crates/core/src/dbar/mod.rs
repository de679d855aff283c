//! The `G` half of the factorization: the spectral dbar solve, Picard
//! iteration for `G`, the planar Beltrami oracle and chart comparison.

mod beltrami;
mod charts;
mod system;

pub use beltrami::{beurling, dbar_inverse, solve_beltrami, BeltramiSolve};
pub use charts::{
    compare_charts, compose_f, cr_residual, holomorphy_defect, second_derivatives, ChartComparison,
    CrReport,
};
pub use system::{solve_dbar_system, solve_g, DbarSystemSolution, GSolve};

use crate::error::{AcsError, Result};
use serde::{Deserialize, Serialize};

/// Stopping rules for the Picard and Neumann loops.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DbarConfig {
    /// Sup-norm size of the Picard increment at which `G` is accepted.
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    /// L² size of the Neumann increment relative to the partial sum.
    pub neumann_tol: f64,
    pub neumann_max_terms: usize,
}

impl Default for DbarConfig {
    fn default() -> Self {
        Self {
            picard_tol: 1e-12,
            picard_max_iter: 300,
            neumann_tol: 1e-14,
            neumann_max_terms: 500,
        }
    }
}

impl DbarConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        if !pos(self.picard_tol) || !pos(self.neumann_tol) {
            return Err(AcsError::InvalidParameter(
                "dbar tolerances must be positive".into(),
            ));
        }
        if self.picard_max_iter == 0 || self.neumann_max_terms == 0 {
            return Err(AcsError::InvalidParameter(
                "dbar iteration caps must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Contraction failure for a coefficient of sup norm `norm`.
pub(crate) fn contraction_failure(norm: f64) -> AcsError {
    AcsError::NoConvergence {
        iterations: 0,
        reason: format!("contraction fails: coefficient sup norm {norm:.4} is not below 1"),
    }
}
