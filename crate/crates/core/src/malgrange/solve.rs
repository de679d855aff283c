//! Quasi-Newton solution of `Psi(H, t) = 0` along a homotopy in `t`, and
//! recovery of `B = E o H^{-1}`.

use super::ops::{gtilde, phi_psi, LINEARIZATION_SIGN};
use crate::acs::{integrability_residual, BeltramiMatrix, IntegrabilityReport, ProductRoute};
use crate::error::{AcsError, Result};
use crate::grid::{
    compose, d_z, invert_map, resample_dilate, spectral_norm, Field, InterpConfig, MapField,
};
use crate::spaces::{sobolev_norm, theta, zygmund_norm, NormReport};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HomotopyKind {
    /// `A_t(z) = A(t z)`, windowed near the cell boundary for `t < 1`.
    #[default]
    Dilate,
    /// `A_t = t A`.
    Scale,
}

impl std::str::FromStr for HomotopyKind {
    type Err = AcsError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dilate" => Ok(Self::Dilate),
            "scale" => Ok(Self::Scale),
            other => Err(AcsError::InvalidParameter(format!(
                "unknown homotopy `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationConfig {
    pub t_steps: usize,
    /// Tolerance on the root-mean-square of the mean-free part of `Psi`.
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub damping: f64,
    pub homotopy: HomotopyKind,
    /// Bound on `|H - id|_C1` that every iterate must respect.
    pub delta_c1: f64,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        Self {
            t_steps: 8,
            newton_tol: 1e-10,
            newton_max_iter: 200,
            damping: 1.0,
            homotopy: HomotopyKind::Dilate,
            delta_c1: 0.9,
        }
    }
}

impl ContinuationConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(AcsError::InvalidParameter(what.to_string()));
        if self.t_steps == 0 {
            return bad("t_steps must be at least 1");
        }
        if !(self.newton_tol > 0.0) || !(self.delta_c1 > 0.0) || self.newton_max_iter == 0 {
            return bad("tolerances, admissibility bound and iteration cap must be positive");
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return bad("damping must lie in (0, 1]");
        }
        Ok(())
    }
}

/// Smallest accepted fraction of the configured step.
const MIN_STEP_FRACTION: f64 = 1.0 / 16.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonRecord {
    pub iterations: usize,
    /// `|Psi|` before the first and after every accepted step.
    pub residuals: Vec<f64>,
    /// Step fraction accepted at every iteration.
    pub steps: Vec<f64>,
    /// `|mean Psi|` at the final iterate. `G~` cannot act on the mean, so
    /// it is a discretisation defect reported apart from the residual.
    pub mean_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: f64,
    pub iterations: usize,
    pub residuals: Vec<f64>,
    pub c1_distance: f64,
    /// `|E(0)|_2`, the value of `B` at the origin.
    pub e_origin: f64,
    /// Final `|Psi|` (mean included), the divergence of `B` pulled back by `H`.
    pub div_b_residual: f64,
    pub mean_defect: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveTrace {
    pub steps: Vec<StepRecord>,
}

/// Radius (as a fraction of the period) inside which the dilation homotopy
/// is not windowed.
pub const DILATION_WINDOW: f64 = 0.4;

/// The homotopy member `A_t`. For the dilation, `A(t z)` is multiplied by a
/// radial window that is 1 for `|z| <= 0.4 L` and 0 beyond `0.5 L`, which
/// keeps `A_t` smooth across the cell boundary; `t = 1` returns `A` itself.
pub fn homotopy_member(a: &BeltramiMatrix, t: f64, kind: HomotopyKind) -> Result<BeltramiMatrix> {
    if !(0.0..=1.0).contains(&t) {
        return Err(AcsError::InvalidParameter(format!(
            "homotopy parameter {t} outside [0, 1]"
        )));
    }
    match kind {
        HomotopyKind::Scale => Ok(a.scale(t)),
        HomotopyKind::Dilate if t == 1.0 => Ok(a.clone()),
        HomotopyKind::Dilate => {
            let grid = *a.grid();
            let l = grid.period();
            let dilated = resample_dilate(a.field(), t)?;
            let window = Field::from_fn(grid, 1, |_, x| {
                let rho = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                Complex64::new(theta(1.0 + (rho - DILATION_WINDOW * l) / (0.1 * l)), 0.0)
            });
            let mut out = dilated;
            for c in 0..out.ncomp() {
                let w = out.component(c).mul(&window)?;
                out.set_component(c, &w);
            }
            BeltramiMatrix::new(out)
        }
    }
}

/// L² size of `Psi` with its mean removed, and the size of the mean.
pub fn psi_split(psi: &Field) -> (f64, f64) {
    let means: Vec<Complex64> = (0..psi.ncomp()).map(|c| psi.mean(c)).collect();
    let total = psi.l2_norm();
    let m2: f64 = means.iter().map(|m| m.norm_sqr()).sum();
    ((total * total - m2).max(0.0).sqrt(), m2.sqrt())
}

/// Damped quasi-Newton iteration `H <- H - s * lambda * G~(Psi(H, A_t))` with
/// the frozen right inverse `G~`; the step fraction `lambda` is halved while
/// the residual does not decrease. Every iterate is renormalised to
/// `H(0) = 0`. The residual is the mean-free part of `Psi`, the part `G~`
/// can reach.
pub fn newton_solve(
    a_t: &BeltramiMatrix,
    h_init: &MapField,
    cfg: &ContinuationConfig,
) -> Result<(MapField, NewtonRecord)> {
    cfg.validate()?;
    if !h_init.linear().is_identity() {
        return Err(AcsError::InvalidParameter(
            "H must be identity plus a periodic displacement".into(),
        ));
    }
    let dist = h_init.c1_distance_from_identity();
    if dist >= cfg.delta_c1 {
        return Err(AcsError::AdmissibilityLost {
            norm: dist,
            bound: cfg.delta_c1,
        });
    }
    let mut h = h_init.clone().normalized();
    let mut res = phi_psi(&h, a_t)?.1;
    let mut r = psi_split(&res).0;
    let mut record = NewtonRecord {
        iterations: 0,
        residuals: vec![r],
        steps: Vec::new(),
        mean_defect: 0.0,
    };
    while r > cfg.newton_tol {
        if record.iterations == cfg.newton_max_iter {
            return Err(AcsError::NoConvergence {
                iterations: record.iterations,
                reason: format!("|Psi| = {r:.3e} above {:.1e}", cfg.newton_tol),
            });
        }
        let step = gtilde(&res).scale(Complex64::new(-LINEARIZATION_SIGN, 0.0));
        let mut lambda = cfg.damping;
        loop {
            let mut trial = h.clone();
            trial
                .displacement_mut()
                .axpy(Complex64::new(lambda, 0.0), &step)?;
            trial.normalize();
            let attempt = phi_psi(&trial, a_t);
            let accepted = match attempt {
                Ok((_, psi)) => {
                    let rt = psi_split(&psi).0;
                    if rt < r {
                        Some((trial, psi, rt))
                    } else {
                        None
                    }
                }
                Err(AcsError::SingularFactor { .. } | AcsError::SingularJacobian { .. }) => None,
                Err(e) => return Err(e),
            };
            if let Some((trial, psi, rt)) = accepted {
                let dist = trial.c1_distance_from_identity();
                if dist >= cfg.delta_c1 {
                    return Err(AcsError::AdmissibilityLost {
                        norm: dist,
                        bound: cfg.delta_c1,
                    });
                }
                h = trial;
                res = psi;
                r = rt;
                record.iterations += 1;
                record.residuals.push(r);
                record.steps.push(lambda);
                break;
            }
            lambda /= 2.0;
            if lambda < cfg.damping * MIN_STEP_FRACTION {
                return Err(AcsError::NoConvergence {
                    iterations: record.iterations,
                    reason: format!("no step of at least 1/16 lowers |Psi| = {r:.3e}"),
                });
            }
        }
    }
    record.mean_defect = psi_split(&res).1;
    Ok((h, record))
}

#[derive(Debug, Clone)]
pub struct Continuation {
    pub h: MapField,
    pub e: BeltramiMatrix,
    pub trace: SolveTrace,
}

/// Failure of a continuation run, keeping the last converged `H`.
#[derive(Debug)]
pub struct ContinuationFailure {
    pub t: f64,
    pub last_good: MapField,
    pub trace: SolveTrace,
    pub error: AcsError,
}

impl std::fmt::Display for ContinuationFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "continuation failed at t = {}: {}", self.t, self.error)
    }
}

impl std::error::Error for ContinuationFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

impl From<ContinuationFailure> for AcsError {
    fn from(f: ContinuationFailure) -> Self {
        AcsError::Continuation {
            t: f.t,
            source: Box::new(f.error),
        }
    }
}

/// Solves `Psi(H, A_t) = 0` for `t = 1/M, 2/M, ..., 1`, each solve warm
/// started from the previous one.
pub fn continuation(
    a: &BeltramiMatrix,
    cfg: &ContinuationConfig,
) -> std::result::Result<Continuation, ContinuationFailure> {
    let grid = *a.grid();
    let mut h = MapField::identity(grid);
    let mut trace = SolveTrace::default();
    let fail = |t, h: &MapField, trace: &SolveTrace, error| ContinuationFailure {
        t,
        last_good: h.clone(),
        trace: trace.clone(),
        error,
    };
    if let Err(e) = cfg.validate() {
        return Err(fail(0.0, &h, &trace, e));
    }
    let mut e_final = None;
    for i in 1..=cfg.t_steps {
        let t = i as f64 / cfg.t_steps as f64;
        let step = homotopy_member(a, t, cfg.homotopy)
            .and_then(|a_t| newton_solve(&a_t, &h, cfg).map(|s| (a_t, s)))
            .and_then(|(a_t, (h_new, rec))| {
                let (e, psi) = phi_psi(&h_new, &a_t)?;
                Ok((h_new, rec, e, psi))
            });
        let (h_new, rec, e, psi) = match step {
            Ok(v) => v,
            Err(err) => return Err(fail(t, &h, &trace, err)),
        };
        trace.steps.push(StepRecord {
            t,
            iterations: rec.iterations,
            residuals: rec.residuals,
            c1_distance: h_new.c1_distance_from_identity(),
            e_origin: spectral_norm(&e.at(0), grid.n()),
            div_b_residual: psi.l2_norm(),
            mean_defect: rec.mean_defect,
        });
        h = h_new;
        e_final = Some(e);
    }
    Ok(Continuation {
        h,
        e: e_final.expect("at least one step"),
        trace,
    })
}

#[derive(Debug, Clone)]
pub struct BExtraction {
    pub b: BeltramiMatrix,
    /// Inverse of `H`, used for the composition.
    pub k: MapField,
    pub zygmund: NormReport,
    pub sobolev: NormReport,
    /// `|B(0)|_2`.
    pub b_origin: f64,
    /// `sup |sum_j dB_j/dzeta_j|`.
    pub div_residual: f64,
    pub integrability: IntegrabilityReport,
}

/// `B = E o H^{-1}` on the `zeta` grid, with its norms, divergence and
/// integrability residual.
pub fn extract_b(
    e: &BeltramiMatrix,
    h: &MapField,
    r: f64,
    s: f64,
    p: f64,
    interp: &InterpConfig,
) -> Result<BExtraction> {
    let grid = *e.grid();
    let n = grid.n();
    let k = invert_map(h, 1e-12, interp)?;
    let b = BeltramiMatrix::new(compose(e.field(), &k, interp)?)?;
    let mut div = Field::zeros(grid, n);
    for j in 0..n {
        for l in 0..n {
            let d = d_z(&b.field().component(j * n + l), j)?;
            let mut comp = div.component(l);
            comp.axpy(Complex64::new(1.0, 0.0), &d)?;
            div.set_component(l, &comp);
        }
    }
    Ok(BExtraction {
        zygmund: zygmund_norm(b.field(), r),
        sobolev: sobolev_norm(b.field(), s, p)?,
        b_origin: spectral_norm(&b.at(0), n),
        div_residual: div.sup_norm(),
        integrability: integrability_residual(&b, s, p, ProductRoute::Auto)?,
        b,
        k,
    })
}
