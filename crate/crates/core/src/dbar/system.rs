//! The overdetermined system `du/dzetabar_j = f_j` and Picard iteration for
//! `G` with `dG/dzetabar = B dG/dzeta`.

use super::charts::cr_residual_field;
use super::{contraction_failure, DbarConfig};
use crate::acs::{BeltramiMatrix, ProductRoute};
use crate::error::{AcsError, Result};
use crate::grid::{d_z, d_zbar, inv_laplacian, Field, LinearPart, MapField};
use num_complex::Complex64;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone)]
pub struct DbarSystemSolution {
    /// Mean-zero solution.
    pub u: Field,
    /// `max_{j<k} sup |df_j/dzetabar_k - df_k/dzetabar_j|`.
    pub compatibility: f64,
    /// `max_j sup |du/dzetabar_j - f_j|`.
    pub defect: f64,
}

/// Least-squares solve of `du/dzetabar_j = f_j` (one component per `j`):
/// `u = 4 G(sum_j df_j/dzeta_j)` with `G` the mean-free inverse Laplacian.
/// The defect vanishes exactly when the data are compatible and mean-free.
pub fn solve_dbar_system(f: &Field) -> Result<DbarSystemSolution> {
    let grid = *f.grid();
    let n = grid.n();
    if f.ncomp() != n {
        return Err(AcsError::DimensionMismatch(format!(
            "dbar system needs {n} components, got {}",
            f.ncomp()
        )));
    }
    let comps = f.components();
    let mut div = Field::zeros(grid, 1);
    for (j, fj) in comps.iter().enumerate() {
        div.axpy(ONE, &d_z(fj, j)?)?;
    }
    let u = inv_laplacian(&div).scale(Complex64::new(4.0, 0.0));

    let mut compatibility: f64 = 0.0;
    for j in 0..n {
        for k in j + 1..n {
            let c = d_zbar(&comps[j], k)?.sub(&d_zbar(&comps[k], j)?)?;
            compatibility = compatibility.max(c.sup_norm());
        }
    }
    let mut defect: f64 = 0.0;
    for (j, fj) in comps.iter().enumerate() {
        defect = defect.max(d_zbar(&u, j)?.sub(fj)?.sup_norm());
    }
    Ok(DbarSystemSolution {
        u,
        compatibility,
        defect,
    })
}

#[derive(Debug, Clone)]
pub struct GSolve {
    pub g: MapField,
    pub iterations: usize,
    /// Sup-norm Picard increments.
    pub increments: Vec<f64>,
    /// Sup norm of `dG/dzetabar - B dG/dzeta`.
    pub residual: f64,
    /// Largest compatibility defect met in the last dbar solve.
    pub compatibility: f64,
    /// Set when the compatibility defect is large enough to stall the
    /// iteration (non-integrable `B`).
    pub warning: Option<String>,
}

/// Compatibility defect above which a warning is attached to a `G` solve.
pub const COMPATIBILITY_WARNING: f64 = 1e-6;

/// Picard iteration `G <- id + dbar_solve(B dG/dzeta)` starting from the
/// identity. The constant part of the data becomes the antilinear part of
/// `G`, the rest goes through [`solve_dbar_system`]; `G(0) = 0`.
pub fn solve_g(b: &BeltramiMatrix, cfg: &DbarConfig) -> Result<GSolve> {
    cfg.validate()?;
    let norm = b.sup_norm();
    if norm >= 1.0 {
        return Err(contraction_failure(norm));
    }
    let grid = *b.grid();
    let n = grid.n();
    let mut g = MapField::identity(grid);
    let mut increments = Vec::new();
    let mut compatibility: f64;
    loop {
        let d = g.derivatives();
        let mut q = vec![Complex64::new(0.0, 0.0); n * n];
        let mut disp = Field::zeros(grid, n);
        compatibility = 0.0;
        for l in 0..n {
            // f_j = sum_m B_jm dG_l/dzeta_m
            let mut f = Field::zeros(grid, n);
            for j in 0..n {
                let mut fj = Field::zeros(grid, 1);
                for m in 0..n {
                    let dg = d.dz.component(l * n + m);
                    fj.axpy(ONE, &b.field().component(j * n + m).mul(&dg)?)?;
                }
                let mean = fj.mean(0);
                q[j * n + l] = mean;
                f.set_component(j, &fj.map(|v| v - mean));
            }
            let sol = solve_dbar_system(&f)?;
            compatibility = compatibility.max(sol.compatibility);
            disp.set_component(l, &sol.u);
        }
        let next = MapField::new(
            LinearPart {
                n,
                p: LinearPart::identity(n).p,
                q,
            },
            disp,
        )?
        .normalized();
        let step = next.node_values().sub(&g.node_values())?.sup_norm();
        increments.push(step);
        g = next;
        if step <= cfg.picard_tol {
            break;
        }
        if increments.len() == cfg.picard_max_iter {
            return Err(AcsError::NoConvergence {
                iterations: increments.len(),
                reason: format!(
                    "Picard increment {step:.3e} above {:.1e} (compatibility defect {compatibility:.3e})",
                    cfg.picard_tol
                ),
            });
        }
    }
    let residual = cr_residual_field(&g, b, ProductRoute::Pointwise)?.sup_norm();
    let warning = (compatibility > COMPATIBILITY_WARNING).then(|| {
        format!(
            "dbar compatibility defect {compatibility:.3e}: B is not integrable to this accuracy"
        )
    });
    Ok(GSolve {
        g,
        iterations: increments.len(),
        increments,
        residual,
        compatibility,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acs::{gen_structure, GenKind, GenParams};
    use crate::grid::Grid;
    use std::f64::consts::PI;

    fn grid(n: usize, size: usize) -> Grid {
        Grid::new(n, size, 2.0 * PI).unwrap()
    }

    #[test]
    fn exact_dbar_data_are_integrated() {
        let g = grid(2, 16);
        let w = Field::from_fn(g, 1, |_, x| {
            Complex64::new((x[0] + 2.0 * x[3]).sin() + 0.4, (x[1] - x[2]).cos())
        });
        let f = Field::stack(&[d_zbar(&w, 0).unwrap(), d_zbar(&w, 1).unwrap()]).unwrap();
        let sol = solve_dbar_system(&f).unwrap();
        let m = w.mean(0);
        assert!(sol.u.sub(&w.map(|v| v - m)).unwrap().sup_norm() <= 1e-10);
        assert!(sol.defect <= 1e-10 && sol.compatibility <= 1e-10);
    }

    #[test]
    fn zero_data_and_incompatible_data() {
        let g = grid(2, 16);
        let sol = solve_dbar_system(&Field::zeros(g, 2)).unwrap();
        assert_eq!(sol.u.sup_norm(), 0.0);
        // f_1 depends on zetabar_2 while f_2 = 0
        let f1 = Field::from_fn(g, 1, |_, x| Complex64::new(x[2].sin(), 0.0));
        let f = Field::stack(&[f1, Field::zeros(g, 1)]).unwrap();
        let sol = solve_dbar_system(&f).unwrap();
        assert!(sol.compatibility >= 0.01, "{}", sol.compatibility);
        assert!(sol.defect >= 0.01, "{}", sol.defect);
    }

    #[test]
    fn zero_coefficient_gives_identity() {
        let g = grid(2, 8);
        let s = solve_g(&BeltramiMatrix::zeros(g), &DbarConfig::default()).unwrap();
        assert_eq!(s.g, MapField::identity(g));
        assert!(s.warning.is_none());
    }

    #[test]
    fn constant_coefficient_gives_the_linear_chart() {
        let g = grid(2, 8);
        let params = GenParams {
            radius: None,
            ..GenParams::default()
        };
        let b = gen_structure(GenKind::Constant, &g, &params, 4).unwrap().a;
        let s = solve_g(&b, &DbarConfig::default()).unwrap();
        assert!(s.residual <= 1e-10, "{}", s.residual);
        // G_l = zeta_l + sum_j zetabar_j b_jl, at every node
        let vals = s.g.node_values();
        let bm = b.at(0);
        let mut worst: f64 = 0.0;
        for idx in 0..g.len() {
            let mut d = [0usize; 4];
            g.digits(idx, &mut d);
            let z: Vec<Complex64> = (0..2)
                .map(|k| Complex64::new(g.wrapped(d[2 * k]), g.wrapped(d[2 * k + 1])))
                .collect();
            for l in 0..2 {
                let want = z[l]
                    + (0..2)
                        .map(|j| z[j].conj() * bm[j * 2 + l])
                        .sum::<Complex64>();
                worst = worst.max((vals.comp(l)[idx] - want).norm());
            }
        }
        assert!(worst <= 1e-10, "{worst}");
    }

    #[test]
    fn planar_solve_matches_the_defining_equation() {
        let g = grid(1, 64);
        let b = gen_structure(GenKind::Pullback, &g, &GenParams::default(), 2)
            .unwrap()
            .a;
        let s = solve_g(&b, &DbarConfig::default()).unwrap();
        assert!(s.residual <= 1e-9, "{}", s.residual);
    }

    #[test]
    fn large_coefficient_is_refused() {
        let g = grid(1, 8);
        let b = BeltramiMatrix::constant(g, &[Complex64::new(1.2, 0.0)]).unwrap();
        assert!(matches!(
            solve_g(&b, &DbarConfig::default()),
            Err(AcsError::NoConvergence { .. })
        ));
    }
}
