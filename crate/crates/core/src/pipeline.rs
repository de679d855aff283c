//! End-to-end chart construction `A -> (H, B) -> G -> F = G o H`.

use crate::acs::{BeltramiMatrix, ProductRoute};
use crate::dbar::{compose_f, cr_residual, solve_g, CrReport, DbarConfig, GSolve};
use crate::error::{AcsError, Result};
use crate::grid::{InterpConfig, MapField};
use crate::malgrange::{continuation, extract_b, BExtraction, ContinuationConfig, SolveTrace};
use serde::Serialize;

/// Regularity indices used for the norm reports of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormIndices {
    pub r: f64,
    pub s: f64,
    pub p: f64,
}

impl Default for NormIndices {
    fn default() -> Self {
        Self {
            r: 0.5,
            s: 1.0,
            p: 2.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ChartSolution {
    pub f: MapField,
    pub h: MapField,
    pub extraction: BExtraction,
    pub g: GSolve,
    pub trace: SolveTrace,
    /// Residual of `dF/dzbar = A dF/dz`.
    pub residual: CrReport,
}

/// Pipeline stage at which a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Continuation,
    Extract,
    Dbar,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Continuation => "continuation",
            Self::Extract => "extract",
            Self::Dbar => "dbar",
        })
    }
}

#[derive(Debug)]
pub struct PipelineError {
    pub stage: Stage,
    pub error: AcsError,
    /// Steps completed before the failure.
    pub trace: SolveTrace,
    /// Last converged `H`, when the continuation got that far.
    pub last_good: Option<MapField>,
}

impl std::fmt::Display for PipelineError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} stage failed: {}", self.stage, self.error)
    }
}

impl std::error::Error for PipelineError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

/// Runs the continuation for `H`, pulls `E` back to `B`, solves for `G` and
/// composes.
pub fn solve_chart(
    a: &BeltramiMatrix,
    cont: &ContinuationConfig,
    dbar: &DbarConfig,
    interp: &InterpConfig,
    idx: NormIndices,
) -> std::result::Result<ChartSolution, PipelineError> {
    let c = continuation(a, cont).map_err(|e| PipelineError {
        stage: Stage::Continuation,
        error: AcsError::Continuation {
            t: e.t,
            source: Box::new(e.error),
        },
        trace: e.trace,
        last_good: Some(e.last_good),
    })?;
    let fail = |stage, error| PipelineError {
        stage,
        error,
        trace: c.trace.clone(),
        last_good: Some(c.h.clone()),
    };
    let extraction =
        extract_b(&c.e, &c.h, idx.r, idx.s, idx.p, interp).map_err(|e| fail(Stage::Extract, e))?;
    let dbar_stage = || -> Result<(GSolve, MapField, CrReport)> {
        let g = solve_g(&extraction.b, dbar)?;
        let f = compose_f(&g.g, &c.h, interp)?;
        let residual = cr_residual(&f, a, idx.s, idx.p, ProductRoute::Auto)?;
        Ok((g, f, residual))
    };
    let (g, f, residual) = dbar_stage().map_err(|e| fail(Stage::Dbar, e))?;
    Ok(ChartSolution {
        f,
        h: c.h,
        extraction,
        g,
        trace: c.trace,
        residual,
    })
}
