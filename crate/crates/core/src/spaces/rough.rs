//! The product of a rough coefficient with a derivative, `u * d_j v`, taken
//! through its Bony decomposition.

use super::lp::{rough_product_terms, BonyTerms};
use super::norms::{sobolev_norm, zygmund_norm, NormReport};
use crate::error::Result;
use crate::grid::Field;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermReport {
    pub term: String,
    pub zygmund: NormReport,
    pub sobolev: NormReport,
}

#[derive(Debug, Clone)]
pub struct RoughProduct {
    pub value: Field,
    pub terms: BonyTerms,
    /// Norms of `T_u(d v)`, `T_{d v} u` and `R(u, d v)` in `C^{r-1}_*` and
    /// `H^{s-1,p}`.
    pub reports: Vec<TermReport>,
}

pub fn rough_product_derivative(
    u: &Field,
    v: &Field,
    axis: usize,
    r: f64,
    s: f64,
    p: f64,
) -> Result<RoughProduct> {
    let terms = rough_product_terms(u, v, axis)?;
    let mut reports = Vec::with_capacity(3);
    for (name, f) in [
        ("T_u(dv)", &terms.t_u_v),
        ("T_dv(u)", &terms.t_v_u),
        ("R(u,dv)", &terms.remainder),
    ] {
        reports.push(TermReport {
            term: name.to_string(),
            zygmund: zygmund_norm(f, r - 1.0),
            sobolev: sobolev_norm(f, s - 1.0, p)?,
        });
    }
    Ok(RoughProduct {
        value: terms.total(),
        terms,
        reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{partial, Grid};
    use crate::spaces::gen_lacunary;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    #[test]
    fn unit_coefficient_gives_the_derivative() {
        let g = Grid::new(1, 64, 2.0 * PI).unwrap();
        let v = gen_lacunary(&g, 0.6, 1, 4, 5).unwrap();
        let one = Field::constant(g, Complex64::new(1.0, 0.0));
        let rp = rough_product_derivative(&one, &v, 0, 0.6, 0.6, 2.0).unwrap();
        let dv = partial(&v, 0).unwrap();
        assert!(rp.value.sub(&dv).unwrap().sup_norm() < 1e-12 * dv.sup_norm());
        assert_eq!(rp.reports.len(), 3);
        assert!(rough_product_derivative(&one, &v, 2, 0.6, 0.6, 2.0).is_err());
    }

    #[test]
    fn smooth_factors_match_the_pointwise_product() {
        let g = Grid::new(1, 64, 2.0 * PI).unwrap();
        let u = Field::from_fn(g, 1, |_, x| {
            Complex64::new((x[0] + x[1]).cos(), 0.3 * x[1].sin())
        });
        let v = Field::from_fn(g, 1, |_, x| {
            Complex64::new((2.0 * x[0]).sin() * x[1].cos(), 0.0)
        });
        let rp = rough_product_derivative(&u, &v, 1, 1.0, 1.0, 2.0).unwrap();
        let want = u.mul(&partial(&v, 1).unwrap()).unwrap();
        assert!(rp.value.sub(&want).unwrap().sup_norm() <= 1e-12 * want.sup_norm());
    }

    #[test]
    fn lacunary_term_bounds_do_not_grow_with_resolution() {
        let (r, s, p) = (0.6, 0.6, 4.0);
        let ratios: Vec<[f64; 3]> = [128, 256, 512]
            .iter()
            .map(|&n| {
                let g = Grid::new(1, n, 2.0 * PI).unwrap();
                let k_high = g.k_max() as u32 - 1;
                let u = gen_lacunary(&g, r, 1, k_high, 1).unwrap();
                let v = gen_lacunary(&g, r, 1, k_high, 2).unwrap();
                let uz = zygmund_norm(&u, r).value;
                let vz = zygmund_norm(&v, r).value;
                let rp = rough_product_derivative(&u, &v, 0, r, s, p).unwrap();
                let mut out = [0.0; 3];
                for (o, rep) in out.iter_mut().zip(&rp.reports) {
                    assert!(rep.zygmund.value.is_finite() && rep.sobolev.value.is_finite());
                    *o = rep.zygmund.value / (uz * vz);
                }
                out
            })
            .collect();
        for t in 0..3 {
            let lo = ratios.iter().map(|r| r[t]).fold(f64::MAX, f64::min);
            let hi = ratios.iter().map(|r| r[t]).fold(0.0, f64::max);
            assert!(hi <= 2.0 * lo, "term {t}: {ratios:?}");
        }
    }
}
