//! Localisation of Beltrami data and generators of test structures.

use super::dictionary::beltrami_from_map;
use super::BeltramiMatrix;
use crate::error::{AcsError, Result};
use crate::grid::{apply_multiplier, spectral_norm, Field, Grid, MapField, Spectrum};
use crate::rng::{stream_rng, streams};
use crate::spaces::{gen_lacunary, theta, zygmund_norm};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Smooth radial cutoff in wrapped coordinates: 1 for `|z| <= R/2`, 0 for
/// `|z| >= R`.
pub fn radial_cutoff(grid: &Grid, radius: f64) -> Field {
    Field::from_fn(*grid, 1, |_, x| {
        let rho = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        Complex64::new(theta(2.0 * rho / radius), 0.0)
    })
}

/// Multiplies `A` by a radial cutoff of radius `radius_fraction * L` and
/// optionally band-limits the result at `N / (2 * mollify_scale)`.
pub fn cutoff_periodize(
    a: &BeltramiMatrix,
    radius_fraction: f64,
    mollify_scale: Option<f64>,
) -> Result<BeltramiMatrix> {
    if !(radius_fraction > 0.0 && radius_fraction <= 0.45) {
        return Err(AcsError::InvalidParameter(format!(
            "cutoff radius fraction must lie in (0, 0.45], got {radius_fraction}"
        )));
    }
    let grid = *a.grid();
    let chi = radial_cutoff(&grid, radius_fraction * grid.period());
    let mut out = a.field().clone();
    for c in 0..out.ncomp() {
        let comp = out.component(c).mul(&chi)?;
        out.set_component(c, &comp);
    }
    if let Some(scale) = mollify_scale {
        if !(scale >= 1.0 && scale.is_finite()) {
            return Err(AcsError::InvalidParameter(format!(
                "mollify scale must be at least 1, got {scale}"
            )));
        }
        let kc = grid.size() as f64 / (2.0 * scale);
        out = apply_multiplier(&out, |k| {
            let rho = k.iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt();
            Complex64::new(theta(2.0 * rho / kc), 0.0)
        })?;
    }
    BeltramiMatrix::new(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenKind {
    Pullback,
    RandomHolder,
    LipschitzKink,
    Constant,
    Nonintegrable,
}

impl std::str::FromStr for GenKind {
    type Err = AcsError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "pullback" => Self::Pullback,
            "random-holder" => Self::RandomHolder,
            "lipschitz-kink" => Self::LipschitzKink,
            "constant" => Self::Constant,
            "nonintegrable" => Self::Nonintegrable,
            other => {
                return Err(AcsError::InvalidParameter(format!(
                    "unknown structure kind `{other}`"
                )))
            }
        })
    }
}

/// Which norm `amp` prescribes for random-holder entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HolderScale {
    #[default]
    Zygmund,
    Sup,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    /// Size of the structure: gradient gauge of the displacement (pullback),
    /// `|A|` (constant, lipschitz-kink), entry norm (random-holder) or the
    /// coefficient `c` (nonintegrable).
    pub amp: f64,
    /// Hölder exponent of random-holder entries.
    pub r: f64,
    pub holder_scale: HolderScale,
    /// Cutoff radius as a fraction of the period; `None` keeps `A` periodic
    /// without localisation. Pullback data is never cut off.
    pub radius: Option<f64>,
    pub mollify: Option<f64>,
    /// Largest frequency per axis of the pullback displacement.
    pub modes: u32,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            amp: 0.3,
            r: 0.6,
            holder_scale: HolderScale::Zygmund,
            radius: Some(0.4),
            mollify: None,
            modes: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenMetadata {
    pub kind: GenKind,
    pub seed: u64,
    pub n: usize,
    pub size: usize,
    pub period: f64,
    pub params: GenParams,
    /// `max_x |A(x)|_2` of the emitted matrix.
    pub sup_norm: f64,
    /// File holding the ground-truth chart, filled in by whoever writes it.
    pub ground_truth: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub a: BeltramiMatrix,
    /// Exact chart with Beltrami matrix `a` (pullback only).
    pub f_true: Option<MapField>,
    pub metadata: GenMetadata,
}

pub fn gen_structure(
    kind: GenKind,
    grid: &Grid,
    params: &GenParams,
    seed: u64,
) -> Result<Generated> {
    let n = grid.n();
    if !(params.amp >= 0.0 && params.amp.is_finite()) {
        return Err(AcsError::InvalidParameter(format!(
            "amplitude must be finite and non-negative, got {}",
            params.amp
        )));
    }
    let need_n = |want: usize| -> Result<()> {
        if n != want {
            return Err(AcsError::InvalidParameter(format!(
                "kind {kind:?} needs n = {want}, got n = {n}"
            )));
        }
        Ok(())
    };
    let mut f_true = None;
    let raw = match kind {
        GenKind::Pullback => {
            let f = pullback_map(grid, params, seed)?;
            let a = beltrami_from_map(&f)?;
            f_true = Some(f);
            a
        }
        GenKind::Constant => {
            let a = if n == 1 {
                vec![Complex64::new(params.amp, 0.0)]
            } else {
                let mut rng = stream_rng(seed, streams::COEFFS);
                let m: Vec<Complex64> = (0..n * n)
                    .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect();
                let s = spectral_norm(&m, n);
                m.into_iter().map(|v| v * (params.amp / s)).collect()
            };
            BeltramiMatrix::constant(*grid, &a)?
        }
        GenKind::RandomHolder => {
            need_n(1)?;
            let k_high = (grid.k_max() - 1).max(1) as u32;
            let u = gen_lacunary(grid, params.r, 1, k_high, seed)?;
            let norm = match params.holder_scale {
                HolderScale::Zygmund => zygmund_norm(&u, params.r).value,
                HolderScale::Sup => u.sup_norm(),
            };
            BeltramiMatrix::new(u.scale(Complex64::new(params.amp / norm, 0.0)))?
        }
        GenKind::LipschitzKink => {
            need_n(1)?;
            let radius = params.radius.unwrap_or(0.4) * grid.period();
            // |z| / R under the cutoff; the kink sits at the origin
            let f = Field::from_fn(*grid, 1, |_, x| {
                let rho = (x[0] * x[0] + x[1] * x[1]).sqrt();
                Complex64::new(params.amp * (rho / radius) * theta(2.0 * rho / radius), 0.0)
            });
            BeltramiMatrix::new(f)?
        }
        GenKind::Nonintegrable => {
            need_n(2)?;
            let w = grid.wavenumber();
            let mut f = Field::zeros(*grid, 4);
            let col = Field::from_fn(*grid, 1, |_, x| {
                Complex64::new(params.amp * (w * x[2]).sin(), 0.0)
            });
            f.set_component(1, &col);
            BeltramiMatrix::new(f)?
        }
    };
    let a = match (kind, params.radius) {
        (GenKind::Pullback | GenKind::LipschitzKink, _) | (_, None) => raw,
        (_, Some(rf)) => cutoff_periodize(&raw, rf, params.mollify)?,
    };
    let metadata = GenMetadata {
        kind,
        seed,
        n,
        size: grid.size(),
        period: grid.period(),
        params: params.clone(),
        sup_norm: a.sup_norm(),
        ground_truth: None,
    };
    Ok(Generated {
        a,
        f_true,
        metadata,
    })
}

/// `F = id + p` with `p` a random trigonometric polynomial of degree
/// `modes` per axis, scaled so that its gradient gauge equals `amp` and
/// shifted so that `F(0) = 0`. The coefficients do not depend on `N`.
fn pullback_map(grid: &Grid, params: &GenParams, seed: u64) -> Result<MapField> {
    let n = grid.n();
    let modes = params.modes as i64;
    if modes < 1 || 2 * modes >= grid.size() as i64 {
        return Err(AcsError::InvalidParameter(format!(
            "pullback modes {modes} must be at least 1 and below N/2"
        )));
    }
    // the gauge is measured on a fixed reference grid so that the map does
    // not depend on the resolution it is sampled at
    let reference = Grid::new(
        n,
        if n == 1 { 64 } else { 16 }
            .max(4 * modes as usize)
            .next_power_of_two(),
        grid.period(),
    )?;
    let unit = MapField::from_displacement(trig_displacement(&reference, modes, seed)?)?;
    let gauge = unit.displacement_gradient_norm();
    let p = trig_displacement(grid, modes, seed)?.scale(Complex64::new(params.amp / gauge, 0.0));
    Ok(MapField::from_displacement(p)?.normalized())
}

fn trig_displacement(grid: &Grid, modes: i64, seed: u64) -> Result<Field> {
    let n = grid.n();
    let m = grid.dim();
    let mut rng = stream_rng(seed, streams::COEFFS);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n * grid.len()];
    let side = (2 * modes + 1) as usize;
    let total = side.pow(m as u32);
    for l in 0..n {
        for t in 0..total {
            let mut rest = t;
            let mut idx = 0usize;
            let mut k2 = 0i64;
            for _ in 0..m {
                let k = (rest % side) as i64 - modes;
                rest /= side;
                k2 += k * k;
                idx = idx * grid.size() + k.rem_euclid(grid.size() as i64) as usize;
            }
            let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            if k2 > 0 {
                coeffs[l * grid.len() + idx] = c / (k2 as f64);
            }
        }
    }
    Ok(Spectrum::from_normalized(*grid, n, coeffs)?.to_field())
}
