//! Norm estimators: Zygmund, Bessel-potential (square function), Lipschitz,
//! dyadic bmo, and a fitted regularity exponent.

use super::lp::{lp_decompose, LPDecomposition};
use crate::error::{AcsError, Result};
use crate::grid::{refine, Field, Grid, Spectrum};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Result of a norm estimate, with the per-block (or per-scale) profile
/// behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub space: String,
    pub params: BTreeMap<String, f64>,
    pub value: f64,
    pub profile: Vec<(i32, f64)>,
}

impl NormReport {
    fn new(space: &str, params: &[(&str, f64)], value: f64, profile: Vec<(i32, f64)>) -> Self {
        Self {
            space: space.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            value,
            profile,
        }
    }
}

fn weight(k: i32, r: f64) -> f64 {
    if k < 0 {
        1.0
    } else {
        2f64.powf(k as f64 * r)
    }
}

/// `max_k 2^{kr} |Delta_k u|_inf`, the lowest block weighted 1.
pub fn zygmund_norm(u: &Field, r: f64) -> NormReport {
    zygmund_from_blocks(&lp_decompose(u), r)
}

pub fn zygmund_from_blocks(d: &LPDecomposition, r: f64) -> NormReport {
    let profile: Vec<(i32, f64)> = d
        .iter()
        .map(|(k, b)| (k, weight(k, r) * b.sup_norm()))
        .collect();
    let value = profile.iter().map(|p| p.1).fold(0.0, f64::max);
    NormReport::new("zygmund", &[("r", r)], value, profile)
}

/// `L^p` grid norm (normalised measure) of the square function
/// `(sum_k 4^{sk} |Delta_k u|^2)^{1/2}`. The profile lists the weighted
/// `L^p` norms of the individual blocks.
pub fn sobolev_norm(u: &Field, s: f64, p: f64) -> Result<NormReport> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(AcsError::InvalidParameter(format!(
            "Sobolev exponent p must lie in (1, inf), got {p}"
        )));
    }
    let d = lp_decompose(u);
    let len = u.grid().len();
    let ncomp = u.ncomp();
    let mut sq = vec![0.0; len];
    let mut profile = Vec::with_capacity(d.len());
    for (k, b) in d.iter() {
        let w2 = weight(k, s).powi(2);
        let mut block_p = 0.0;
        for i in 0..len {
            let a2: f64 = (0..ncomp).map(|c| b.comp(c)[i].norm_sqr()).sum();
            sq[i] += w2 * a2;
            block_p += (w2 * a2).powf(p / 2.0);
        }
        profile.push((k, (block_p / len as f64).powf(1.0 / p)));
    }
    let value = (sq.iter().map(|v| v.powf(p / 2.0)).sum::<f64>() / len as f64).powf(1.0 / p);
    Ok(NormReport::new(
        "sobolev",
        &[("s", s), ("p", p)],
        value,
        profile,
    ))
}

/// Direct Bessel-potential norm `(sum_xi (1 + |xi|^2)^s |c_xi|^2)^{1/2}` with
/// normalised Fourier coefficients and integer lattice frequencies.
pub fn sobolev_multiplier_norm(u: &Field, s: f64) -> f64 {
    let g = *u.grid();
    let m = g.dim();
    let spec = Spectrum::of(u);
    let c = spec.normalized();
    let mut d = [0usize; 4];
    let mut total = 0.0;
    for idx in 0..g.len() {
        g.digits(idx, &mut d[..m]);
        let k2: f64 = d[..m].iter().map(|&i| (g.freq(i) as f64).powi(2)).sum();
        let w = (1.0 + k2).powf(s);
        for comp in 0..u.ncomp() {
            total += w * c[comp * g.len() + idx].norm_sqr();
        }
    }
    total.sqrt()
}

/// Largest forward-difference slope `|u(x + h e_a) - u(x)| / h` over nodes,
/// axes and components. Profile entries are per axis.
pub fn lipschitz_seminorm(u: &Field) -> NormReport {
    let g = *u.grid();
    let m = g.dim();
    let n = g.size();
    let h = g.spacing();
    let mut profile = Vec::with_capacity(m);
    for a in 0..m {
        let stride = n.pow((m - 1 - a) as u32);
        let mut worst: f64 = 0.0;
        for c in 0..u.ncomp() {
            let v = u.comp(c);
            for idx in 0..g.len() {
                let digit = (idx / stride) % n;
                let next = if digit + 1 == n {
                    idx + stride - n * stride
                } else {
                    idx + stride
                };
                worst = worst.max((v[next] - v[idx]).norm() / h);
            }
        }
        profile.push((a as i32, worst));
    }
    let value = profile.iter().map(|p| p.1).fold(0.0, f64::max);
    NormReport::new("lipschitz", &[], value, profile)
}

/// Supremum over nodes, profile per component.
pub fn sup_norm_report(u: &Field) -> NormReport {
    let profile: Vec<(i32, f64)> = (0..u.ncomp())
        .map(|c| {
            (
                c as i32,
                u.comp(c).iter().map(|z| z.norm()).fold(0.0, f64::max),
            )
        })
        .collect();
    let value = profile.iter().map(|p| p.1).fold(0.0, f64::max);
    NormReport::new("sup", &[], value, profile)
}

/// Worst mean oscillation over aligned dyadic cubes of side `L / 2^j`,
/// `j = 0, ..., log2 N - 2`, plus the modulus of the mean; components are
/// measured separately and the maximum is reported. Profile entry `j` is the
/// worst oscillation at that level.
pub fn bmo_norm(u: &Field) -> NormReport {
    let g = *u.grid();
    let levels = g.size().trailing_zeros() as i32 - 1;
    let mut value: f64 = 0.0;
    let mut profile = vec![0.0f64; levels as usize];
    for c in 0..u.ncomp() {
        let v = u.comp(c);
        let mut worst: f64 = 0.0;
        for j in 0..levels {
            let osc = level_oscillation(&g, v, j as u32);
            profile[j as usize] = profile[j as usize].max(osc);
            worst = worst.max(osc);
        }
        value = value.max(worst + u.mean(c).norm());
    }
    let profile = profile
        .into_iter()
        .enumerate()
        .map(|(j, v)| (j as i32, v))
        .collect();
    NormReport::new("bmo", &[], value, profile)
}

fn level_oscillation(g: &Grid, v: &[num_complex::Complex64], j: u32) -> f64 {
    use num_complex::Complex64;
    let m = g.dim();
    let n = g.size();
    let side = n >> j;
    let per_axis = 1usize << j;
    let cubes = per_axis.pow(m as u32);
    let mut sums = vec![Complex64::new(0.0, 0.0); cubes];
    let cube_of = |idx: usize| {
        let mut rest = idx;
        let mut cube = 0;
        let mut scale = 1;
        for _ in 0..m {
            let digit = rest % n;
            rest /= n;
            cube += (digit / side) * scale;
            scale *= per_axis;
        }
        cube
    };
    for (idx, z) in v.iter().enumerate() {
        sums[cube_of(idx)] += z;
    }
    let count = (side.pow(m as u32)) as f64;
    let means: Vec<Complex64> = sums.iter().map(|s| s / count).collect();
    let mut osc = vec![0.0; cubes];
    for (idx, z) in v.iter().enumerate() {
        let q = cube_of(idx);
        osc[q] += (z - means[q]).norm();
    }
    osc.iter().map(|o| o / count).fold(0.0, f64::max)
}

/// Zygmund exponent estimated from the decay of the block sup norms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityProfile {
    /// `-slope` of the least-squares line through `log2 |Delta_k u|_inf`;
    /// infinite (serialised as `null`) when too few blocks survive because
    /// the field is resolved to rounding level.
    pub exponent: f64,
    /// Coefficient of determination of the fit.
    pub r_squared: f64,
    /// Blocks at rounding level before the top of the grid's range.
    pub super_smooth: bool,
    /// Blocks used in the fit.
    pub fit_blocks: Vec<i32>,
    /// `(k, |Delta_k u|_inf)` for all blocks.
    pub blocks: Vec<(i32, f64)>,
}

const ACTIVE_FLOOR: f64 = 1e-13;
const MIN_BLOCKS: usize = 4;

const REFINED_POINTS: usize = 1 << 22;

/// Fits the block decay over the upper half (at least four blocks) of the
/// active blocks among `k = 0, ..., k_max - 1`. Low blocks of a `C^r` field
/// are only bounded by `2^{-kr}`, and a smooth large-scale part (a cutoff,
/// the identity in a chart derivative) flattens them, so the exponent is read
/// off the tail. The top block, which holds the lattice corners and the
/// unpaired Nyquist bin, is left out. Block sup norms are read off a refined grid (up to 4x per axis) so that
/// blocks near the sampling limit are not underestimated.
pub fn regularity_profile(u: &Field) -> Result<RegularityProfile> {
    let d = lp_decompose(u);
    let g = u.grid();
    let mut factor = 4usize;
    while factor > 1 && g.len() * factor.pow(g.dim() as u32) > REFINED_POINTS {
        factor /= 2;
    }
    let blocks: Vec<(i32, f64)> = d
        .iter()
        .map(|(k, b)| {
            (
                k,
                refine(b, factor).expect("power-of-two factor").sup_norm(),
            )
        })
        .collect();
    let k_max = d.k_max();
    let candidates: Vec<(i32, f64)> = blocks
        .iter()
        .copied()
        .filter(|&(k, _)| k >= 0 && k < k_max)
        .collect();
    let peak = candidates.iter().map(|p| p.1).fold(0.0, f64::max);
    let active: Vec<(i32, f64)> = candidates
        .iter()
        .copied()
        .filter(|&(_, v)| peak > 0.0 && v > ACTIVE_FLOOR * peak)
        .collect();
    let last_active = active.last().map(|p| p.0);
    let super_smooth = matches!(last_active, Some(k) if k < k_max - 1);
    if active.len() < MIN_BLOCKS {
        if super_smooth {
            return Ok(RegularityProfile {
                exponent: f64::INFINITY,
                r_squared: f64::NAN,
                super_smooth,
                fit_blocks: active.iter().map(|p| p.0).collect(),
                blocks,
            });
        }
        return Err(AcsError::TooFewBlocks {
            active: active.len(),
            needed: MIN_BLOCKS,
        });
    }
    let tail = &active[active.len() - MIN_BLOCKS.max(active.len().div_ceil(2))..];
    let xs: Vec<f64> = tail.iter().map(|p| p.0 as f64).collect();
    let ys: Vec<f64> = tail.iter().map(|p| p.1.log2()).collect();
    let (slope, r2) = least_squares(&xs, &ys);
    Ok(RegularityProfile {
        exponent: -slope,
        r_squared: r2,
        super_smooth,
        fit_blocks: tail.iter().map(|p| p.0).collect(),
        blocks,
    })
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    (slope, r2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use crate::spaces::gen_lacunary;
    use num_complex::Complex64;
    use rand::Rng;
    use std::f64::consts::PI;

    fn grid(size: usize) -> Grid {
        Grid::new(1, size, 2.0 * PI).unwrap()
    }

    fn wave(g: Grid, k: f64) -> Field {
        Field::from_fn(g, 1, |_, x| Complex64::from_polar(1.0, k * x[0]))
    }

    #[test]
    fn zygmund_cases() {
        let g = grid(512);
        assert_eq!(zygmund_norm(&Field::zeros(g, 1), 0.6).value, 0.0);
        let u = gen_lacunary(&g, 0.6, 3, 8, 42).unwrap();
        let z = zygmund_norm(&u, 0.6);
        assert!((z.value - 1.0).abs() <= 0.1, "{}", z.value);
        assert_eq!(z.profile.len() as i32, g.k_max() + 2);
        let w = zygmund_norm(&wave(g, 32.0), 1.0);
        assert!((w.value - 32.0).abs() < 1e-10);
    }

    #[test]
    fn weighted_profiles_are_ordered() {
        let g = grid(128);
        let u = gen_lacunary(&g, 0.5, 0, 6, 1).unwrap();
        let hi = zygmund_norm(&u, 1.2);
        let lo = zygmund_norm(&u, 0.4);
        for (a, b) in hi.profile.iter().zip(&lo.profile) {
            assert!(a.1 >= b.1);
        }
        assert!(hi.value >= lo.value * 2f64.powf(-(g.k_max() as f64) * 0.8));
    }

    #[test]
    fn sobolev_cases() {
        let g = grid(256);
        assert_eq!(
            sobolev_norm(&Field::zeros(g, 1), 1.0, 2.0).unwrap().value,
            0.0
        );
        let s = Field::from_fn(g, 1, |_, x| Complex64::new(x[0].sin(), 0.0));
        let l2 = s.l2_norm();
        let v = sobolev_norm(&s, 0.0, 2.0).unwrap().value;
        assert!((v / l2 - 1.0).abs() <= 0.25);
        assert!((sobolev_multiplier_norm(&s, 0.0) - l2).abs() < 1e-12);
        let e = wave(g, 64.0);
        let v = sobolev_norm(&e, 1.0, 2.0).unwrap().value;
        assert!(v / 64.0 <= 2.0 && v / 64.0 >= 0.5);
        assert!(sobolev_norm(&e, 1.0, 1.0).is_err());
        assert!(sobolev_norm(&e, 1.0, 0.5).is_err());
    }

    #[test]
    fn bmo_cases() {
        let g = grid(64);
        let c = Complex64::new(0.3, -0.4);
        let b = bmo_norm(&Field::constant(g, c));
        assert!((b.value - 0.5).abs() < 1e-12, "{:?}", b);
        assert_eq!(b.profile.len(), 5);
        let saw = Field::from_fn(g, 1, |_, x| Complex64::new(x[0], 0.0));
        assert!(bmo_norm(&saw).value <= saw.sup_norm());
        let shifted = saw.map(|z| z + Complex64::new(2.0, 0.0));
        let diff = bmo_norm(&shifted).value - bmo_norm(&saw).value;
        let mean_gap = shifted.mean(0).norm() - saw.mean(0).norm();
        assert!((diff - mean_gap).abs() < 1e-12);
    }

    #[test]
    fn bmo_of_log_singularity_is_stable_under_refinement() {
        let vals: Vec<f64> = [256, 512, 1024]
            .iter()
            .map(|&n| {
                let g = grid(n);
                let h = g.spacing();
                // cell midpoints keep the samples off the singularity
                let u = Field::from_fn(g, 1, |_, x| {
                    Complex64::new((0.5 * (x[0] + 0.5 * h)).sin().abs().ln(), 0.0)
                });
                bmo_norm(&u).value
            })
            .collect();
        let (lo, hi) = vals
            .iter()
            .fold((f64::MAX, 0.0f64), |(a, b), v| (a.min(*v), b.max(*v)));
        assert!(hi / lo <= 1.1, "{vals:?}");
    }

    #[test]
    fn lipschitz_of_a_sine() {
        let g = grid(256);
        let s = Field::from_fn(g, 1, |_, x| Complex64::new(x[0].sin(), 0.0));
        let l = lipschitz_seminorm(&s);
        assert!((l.value - 1.0).abs() < 1e-3);
        assert!(l.profile[1].1 < 1e-12);
    }

    #[test]
    fn regularity_of_constructed_samples() {
        let g = grid(512);
        let u = gen_lacunary(&g, 0.6, 1, 7, 42).unwrap();
        let p = regularity_profile(&u).unwrap();
        assert!((p.exponent - 0.6).abs() <= 0.1, "{}", p.exponent);
        assert!(p.r_squared > 0.99, "{:?}", p);

        let smooth = Field::from_fn(g, 1, |_, x| {
            Complex64::new(x[0].sin() + 0.5 * (2.0 * x[1]).cos(), 0.0)
        });
        let p = regularity_profile(&smooth).unwrap();
        assert!(p.super_smooth);
        assert!(p.exponent >= 2.0);

        let tiny = Grid::new(1, 16, 2.0 * PI).unwrap();
        let mut rng = stream_rng(1, 3);
        let noise = Field::from_values(
            tiny,
            1,
            (0..tiny.len())
                .map(|_| Complex64::new(rng.gen(), 0.0))
                .collect(),
        )
        .unwrap();
        assert!(matches!(
            regularity_profile(&noise),
            Err(AcsError::TooFewBlocks { .. })
        ));
    }

    #[test]
    fn white_noise_decays_like_half_the_dimension() {
        // energy in block k grows like 2^{km}, so block sup norms grow like
        // 2^{km/2}: the fitted exponent is -m/2 rather than 0
        let g = grid(256);
        let mut rng = stream_rng(7, 3);
        let noise = Field::from_values(
            g,
            1,
            (0..g.len())
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0))
                .collect(),
        )
        .unwrap();
        let p = regularity_profile(&noise).unwrap();
        assert!((p.exponent + 1.0).abs() <= 0.15, "{}", p.exponent);
    }

    #[test]
    fn report_serialises_with_stable_keys() {
        let g = grid(16);
        let r = sobolev_norm(&wave(g, 2.0), 0.5, 3.0).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        assert!(
            json.starts_with("{\"space\":\"sobolev\",\"params\":{\"p\":3.0,\"s\":0.5},\"value\":")
        );
        let back: NormReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }
}
