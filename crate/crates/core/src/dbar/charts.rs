//! Composition `F = G o H`, the Beltrami-system residual of a chart, and
//! comparison of charts up to biholomorphism.

use crate::acs::nijenhuis::{product, resolve};
use crate::acs::{BeltramiMatrix, ProductRoute, StructureField};
use crate::error::{AcsError, Result};
use crate::grid::{compose_map, d_z, d_zbar, spectral_norm, Field, InterpConfig, MapField};
use crate::malgrange::inverse_derivatives;
use crate::spaces::{sobolev_norm, NormReport};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// `F = G o H`, normalised to `F(0) = 0`.
pub fn compose_f(g: &MapField, h: &MapField, interp: &InterpConfig) -> Result<MapField> {
    g.grid().check_same(h.grid())?;
    Ok(compose_map(g, h, interp)?.normalized())
}

/// Residual `dF_l/dzbar_j - sum_k A_jk dF_l/dz_k`, component `j * n + l`.
pub(crate) fn cr_residual_field(
    f: &MapField,
    a: &BeltramiMatrix,
    route: ProductRoute,
) -> Result<Field> {
    let grid = *a.grid();
    grid.check_same(f.grid())?;
    let n = grid.n();
    let d = f.derivatives();
    let route = resolve(route, &[a.field(), &d.dz, &d.dzbar]);
    let mut out = Field::zeros(grid, n * n);
    for l in 0..n {
        for j in 0..n {
            let mut r = d.dzbar.component(l * n + j);
            for k in 0..n {
                let ajk = a.field().component(j * n + k);
                let fz = d.dz.component(l * n + k);
                r.axpy(-ONE, &product(&ajk, &fz, route))?;
            }
            out.set_component(j * n + l, &r);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrReport {
    pub sup: f64,
    pub l2: f64,
    /// Sup of the residual over sup of `dF/dz`.
    pub relative_sup: f64,
    /// `H^{s-1,p}` norm of the residual.
    pub sobolev: NormReport,
    /// `|F - id|_C1`.
    pub c1_distance: f64,
}

/// Size of `dF/dzbar - A dF/dz` in several norms.
pub fn cr_residual(
    f: &MapField,
    a: &BeltramiMatrix,
    s: f64,
    p: f64,
    route: ProductRoute,
) -> Result<CrReport> {
    let res = cr_residual_field(f, a, route)?;
    let fz = f.derivatives().dz.sup_norm();
    let sup = res.sup_norm();
    Ok(CrReport {
        sup,
        l2: res.l2_norm(),
        relative_sup: if fz > 0.0 { sup / fz } else { sup },
        sobolev: sobolev_norm(&res, s - 1.0, p)?,
        c1_distance: f.c1_distance_from_identity(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChartComparison {
    /// `sup |dW/dzetabar| / sup |dW/dzeta|` over the region, for the
    /// transition map `W = F2 o F1^{-1}`.
    pub residual: f64,
    pub dz_sup: f64,
    pub dzbar_sup: f64,
    /// Number of nodes inside the region.
    pub points: usize,
}

/// Compares two charts up to biholomorphism. The derivatives of
/// `W = F2 o F1^{-1}` at the points `F1(x)` follow from the chain rule with
/// the pointwise inverse of the Jacobian of `F1`, so no map inversion is
/// needed. Only nodes with `|F1(x)| <= radius` are used (all nodes when
/// `radius` is `None`).
pub fn compare_charts(
    f1: &MapField,
    f2: &MapField,
    radius: Option<f64>,
) -> Result<ChartComparison> {
    let grid = *f1.grid();
    grid.check_same(f2.grid())?;
    let n = grid.n();
    let (pk, qk) = inverse_derivatives(&f1.derivatives())?;
    let d2 = f2.derivatives();
    let vals = f1.node_values();
    let (mut dz_sup, mut dzbar_sup, mut points) = (0.0f64, 0.0f64, 0usize);
    let mut wz = [ZERO; 4];
    let mut wzb = [ZERO; 4];
    for idx in 0..grid.len() {
        if let Some(r) = radius {
            let rho: f64 = (0..n)
                .map(|l| vals.comp(l)[idx].norm_sqr())
                .sum::<f64>()
                .sqrt();
            if rho > r {
                continue;
            }
        }
        points += 1;
        for l in 0..n {
            for j in 0..n {
                let (mut a, mut b) = (ZERO, ZERO);
                for m in 0..n {
                    let fz = d2.dz.comp(l * n + m)[idx];
                    let fzb = d2.dzbar.comp(l * n + m)[idx];
                    let p = pk.comp(m * n + j)[idx];
                    let q = qk.comp(m * n + j)[idx];
                    // p = dk_m/dzeta_j, q = dkbar_m/dzeta_j
                    a += fz * p + fzb * q;
                    b += fz * q.conj() + fzb * p.conj();
                }
                wz[l * n + j] = a;
                wzb[l * n + j] = b;
            }
        }
        dz_sup = dz_sup.max(spectral_norm(&wz[..n * n], n));
        dzbar_sup = dzbar_sup.max(spectral_norm(&wzb[..n * n], n));
    }
    if points == 0 {
        return Err(AcsError::InvalidParameter(
            "comparison region contains no nodes".into(),
        ));
    }
    let residual = if dz_sup > 0.0 {
        dzbar_sup / dz_sup
    } else if dzbar_sup > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    Ok(ChartComparison {
        residual,
        dz_sup,
        dzbar_sup,
        points,
    })
}

/// `max_{l, a} sup |(X_a + i J X_a) f_l|` over the coordinate fields `X_a`;
/// zero when every component of `F` is `J`-holomorphic.
pub fn holomorphy_defect(f: &MapField, j: &StructureField) -> Result<f64> {
    let grid = *f.grid();
    grid.check_same(j.grid())?;
    let n = grid.n();
    let d = f.derivatives();
    let mut worst: f64 = 0.0;
    for l in 0..n {
        // real partials in axis order (x_1, y_1, ..., x_n, y_n)
        let mut real = Vec::with_capacity(2 * n);
        for k in 0..n {
            let fz = d.dz.component(l * n + k);
            let fzb = d.dzbar.component(l * n + k);
            real.push(fz.add(&fzb)?);
            real.push(fz.sub(&fzb)?.scale(I));
        }
        for a in 0..2 * n {
            let mut v = real[a].clone();
            for (b, rb) in real.iter().enumerate() {
                let jba = Field::from_values(grid, 1, j.entry(b, a).to_vec())?;
                v.axpy(I, &jba.mul(rb)?)?;
            }
            worst = worst.max(v.sup_norm());
        }
    }
    Ok(worst)
}

/// All second complex derivatives `d_z d_z F` and `d_zbar d_z F`, stacked as
/// one field (the `d_z` factor runs over every Jacobian entry).
pub fn second_derivatives(f: &MapField) -> Result<Field> {
    let grid = *f.grid();
    let n = grid.n();
    let d = f.derivatives();
    let mut parts = Vec::with_capacity(2 * n * n * n);
    for c in 0..n * n {
        let dc = d.dz.component(c);
        for j in 0..n {
            parts.push(d_z(&dc, j)?);
            parts.push(d_zbar(&dc, j)?);
        }
    }
    Field::stack(&parts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acs::{gen_structure, structure_from_beltrami, GenKind, GenParams};
    use crate::grid::Grid;
    use std::f64::consts::PI;

    fn grid(n: usize, size: usize) -> Grid {
        Grid::new(n, size, 2.0 * PI).unwrap()
    }

    fn smooth_map(g: Grid, eps: f64) -> MapField {
        let disp = Field::from_fn(g, g.n(), |c, x| {
            let s: f64 = x
                .iter()
                .enumerate()
                .map(|(i, v)| (i + c + 1) as f64 * 0.1 * v)
                .sum();
            Complex64::new(eps * (x[0] + s).sin(), eps * (x[x.len() - 1] - s).cos())
        });
        MapField::from_displacement(disp).unwrap().normalized()
    }

    #[test]
    fn composition_with_identity() {
        let g = grid(1, 32);
        let h = smooth_map(g, 0.1);
        let id = MapField::identity(g);
        let cfg = InterpConfig::for_grid(&g);
        let f = compose_f(&id, &h, &cfg).unwrap();
        assert!(f.node_values().sub(&h.node_values()).unwrap().sup_norm() <= 1e-12);
        let f = compose_f(&h, &id, &cfg).unwrap();
        assert!(f.node_values().sub(&h.node_values()).unwrap().sup_norm() <= 1e-12);
    }

    #[test]
    fn residual_of_exact_charts() {
        let g = grid(1, 32);
        let zero = BeltramiMatrix::zeros(g);
        let r = cr_residual(&MapField::identity(g), &zero, 1.0, 2.0, ProductRoute::Auto).unwrap();
        assert_eq!(r.sup, 0.0);

        let params = GenParams {
            amp: 0.3,
            radius: None,
            ..GenParams::default()
        };
        let a = gen_structure(GenKind::Constant, &g, &params, 0).unwrap().a;
        let lin = crate::grid::LinearPart {
            n: 1,
            p: vec![ONE],
            q: vec![Complex64::new(0.3, 0.0)],
        };
        let f = MapField::new(lin, Field::zeros(g, 1)).unwrap();
        let r = cr_residual(&f, &a, 1.0, 2.0, ProductRoute::Auto).unwrap();
        assert!(r.sup <= 1e-12);

        let gen = gen_structure(GenKind::Pullback, &g, &GenParams::default(), 3).unwrap();
        let r = cr_residual(
            gen.f_true.as_ref().unwrap(),
            &gen.a,
            1.0,
            2.0,
            ProductRoute::Pointwise,
        )
        .unwrap();
        assert!(r.sup <= 1e-10, "{}", r.sup);
    }

    #[test]
    fn chart_comparison_cases() {
        for n in [1, 2] {
            let g = grid(n, if n == 1 { 32 } else { 8 });
            let f = smooth_map(g, 0.05);
            assert!(compare_charts(&f, &f, None).unwrap().residual <= 1e-12);
            // complex-linear post-composition is biholomorphic
            let m: Vec<Complex64> = if n == 1 {
                vec![Complex64::new(1.3, -0.4)]
            } else {
                vec![
                    Complex64::new(1.1, 0.2),
                    Complex64::new(0.3, 0.0),
                    Complex64::new(-0.2, 0.5),
                    ONE,
                ]
            };
            let lf = f.then_linear(&m);
            assert!(compare_charts(&f, &lf, None).unwrap().residual <= 1e-10);
            assert!(compare_charts(&f, &f.conj(), None).unwrap().residual >= 0.5);
        }
    }

    #[test]
    fn second_derivatives_of_a_quadratic_free_map() {
        let g = grid(1, 16);
        let disp = Field::from_fn(g, 1, |_, x| Complex64::new(x[0].cos(), 0.0));
        let f = MapField::from_displacement(disp).unwrap();
        let h = second_derivatives(&f).unwrap();
        // d_z d_z cos x = d_zbar d_z cos x = -cos(x) / 4
        let want = Field::from_fn(g, 1, |_, x| Complex64::new(-x[0].cos() / 4.0, 0.0));
        for c in 0..2 {
            assert!(h.component(c).sub(&want).unwrap().sup_norm() < 1e-13);
        }
        assert_eq!(
            second_derivatives(&MapField::identity(g))
                .unwrap()
                .sup_norm(),
            0.0
        );
    }

    #[test]
    fn region_restricts_the_nodes() {
        let g = grid(1, 32);
        let f = smooth_map(g, 0.05);
        let all = compare_charts(&f, &f, None).unwrap().points;
        let some = compare_charts(&f, &f, Some(1.0)).unwrap().points;
        assert!(some < all && some > 0);
    }

    #[test]
    fn ground_truth_charts_are_holomorphic() {
        for n in [1, 2] {
            let g = grid(n, if n == 1 { 32 } else { 8 });
            let gen = gen_structure(GenKind::Pullback, &g, &GenParams::default(), 1).unwrap();
            let j = structure_from_beltrami(&gen.a).unwrap();
            let d = holomorphy_defect(gen.f_true.as_ref().unwrap(), &j).unwrap();
            assert!(d <= 1e-10, "n = {n}: {d}");
            let off = holomorphy_defect(&MapField::identity(g), &j).unwrap();
            assert!(off >= 1e-3);
        }
    }
}
