//! The Nijenhuis tensor of `J` and the integrability condition on `A`.

use super::{BeltramiMatrix, StructureField, VectorField};
use crate::error::{AcsError, Result};
use crate::grid::{d_z, d_zbar, Field, Spectrum};
use crate::spaces::{bony_decompose, sobolev_norm, BonyConfig, NormReport};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// How products of a coefficient with a derivative are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProductRoute {
    /// Bony decomposition `T_u w + T_w u + R(u, w)` for every product.
    Bony,
    /// Plain pointwise multiplication of node values.
    Pointwise,
    /// Pointwise when every input is band-limited below `N/8` or the grid
    /// is too large to hold the dyadic blocks, Bony otherwise.
    #[default]
    Auto,
}

/// Above this many nodes the block storage of the Bony route is not affordable.
const BONY_NODE_LIMIT: usize = 1 << 18;
const BAND_FLOOR: f64 = 1e-14;

fn band_limited(u: &Field, cut: i64) -> bool {
    let g = *u.grid();
    let m = g.dim();
    let spec = Spectrum::of(u);
    let coeffs = spec.coeffs();
    let peak = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return true;
    }
    let mut d = [0usize; 4];
    for c in 0..u.ncomp() {
        for idx in 0..g.len() {
            g.digits(idx, &mut d[..m]);
            if d[..m].iter().any(|&i| g.freq(i).abs() >= cut)
                && coeffs[c * g.len() + idx].norm() > BAND_FLOOR * peak
            {
                return false;
            }
        }
    }
    true
}

/// Settles `Auto` once for a computation whose products are all formed from
/// `inputs` and their derivatives.
pub(crate) fn resolve(route: ProductRoute, inputs: &[&Field]) -> ProductRoute {
    match route {
        ProductRoute::Auto => {
            let g = inputs[0].grid();
            let cut = (g.size() / 8) as i64;
            if g.len() <= BONY_NODE_LIMIT && !inputs.iter().all(|u| band_limited(u, cut)) {
                ProductRoute::Bony
            } else {
                ProductRoute::Pointwise
            }
        }
        fixed => fixed,
    }
}

/// Product of two fields along a resolved route (`Auto` multiplies pointwise).
pub(crate) fn product(u: &Field, w: &Field, route: ProductRoute) -> Field {
    if route == ProductRoute::Bony {
        bony_decompose(u, w, BonyConfig::default())
            .expect("factors share a grid")
            .total()
    } else {
        u.mul(w).expect("factors share a grid")
    }
}

fn flat(u: &Field) -> bool {
    let v = u.values();
    v.iter().all(|x| *x == v[0])
}

/// Lie bracket `[P, Q]^c = sum_b P^b d_b Q^c - Q^b d_b P^c`. Vanishing
/// factors and derivatives of constant components (coordinate fields) are
/// skipped.
fn bracket(p: &[Field], q: &[Field], route: ProductRoute) -> Result<Vec<Field>> {
    let d = p.len();
    let grid = *p[0].grid();
    let live = |f: &[Field]| f.iter().map(|u| u.sup_norm() > 0.0).collect::<Vec<_>>();
    let (lp, lq) = (live(p), live(q));
    let mut out = vec![Field::zeros(grid, 1); d];
    for c in 0..d {
        let sq = (!flat(&q[c])).then(|| Spectrum::of(&q[c]));
        let sp = (!flat(&p[c])).then(|| Spectrum::of(&p[c]));
        for b in 0..d {
            if let (true, Some(sq)) = (lp[b], &sq) {
                out[c].axpy(Complex64::new(1.0, 0.0), &product(&p[b], &sq.partial(b), route))?;
            }
            if let (true, Some(sp)) = (lq[b], &sp) {
                out[c].axpy(Complex64::new(-1.0, 0.0), &product(&q[b], &sp.partial(b), route))?;
            }
        }
    }
    Ok(out)
}

fn apply_j(j: &StructureField, x: &[Field]) -> Vec<Field> {
    let d = x.len();
    let grid = *j.grid();
    (0..d)
        .map(|a| {
            let mut out = Field::zeros(grid, 1);
            for (b, xb) in x.iter().enumerate() {
                let jab = Field::from_values(grid, 1, j.entry(a, b).to_vec()).expect("finite");
                out.axpy(Complex64::new(1.0, 0.0), &jab.mul(xb).expect("same grid"))
                    .expect("same grid");
            }
            out
        })
        .collect()
}

/// `N(X, Y) = [X, Y] - [JX, JY] + J[X, JY] + J[JX, Y]`.
pub fn nijenhuis(
    j: &StructureField,
    x: &VectorField,
    y: &VectorField,
    route: ProductRoute,
) -> Result<VectorField> {
    j.grid().check_same(x.grid())?;
    j.grid().check_same(y.grid())?;
    let xs = x.field().components();
    let ys = y.field().components();
    let route = resolve(route, &[j.field(), x.field(), y.field()]);
    let jx = apply_j(j, &xs);
    let jy = apply_j(j, &ys);
    let mut total = bracket(&xs, &ys, route)?;
    let minus = bracket(&jx, &jy, route)?;
    let plus1 = apply_j(j, &bracket(&xs, &jy, route)?);
    let plus2 = apply_j(j, &bracket(&jx, &ys, route)?);
    for c in 0..total.len() {
        total[c].axpy(Complex64::new(-1.0, 0.0), &minus[c])?;
        total[c].axpy(Complex64::new(1.0, 0.0), &plus1[c])?;
        total[c].axpy(Complex64::new(1.0, 0.0), &plus2[c])?;
    }
    VectorField::new(Field::stack(&total)?)
}

#[derive(Debug, Clone)]
pub struct IntegrabilityReport {
    /// Index pairs `(j, k)`, `j < k` (0-based).
    pub pairs: Vec<(usize, usize)>,
    /// One `n`-component residual field per pair.
    pub residuals: Vec<Field>,
    /// Sup of all residual components over the grid.
    pub sup: f64,
    /// Largest `H^{s-1,p}` norm among the residual fields.
    pub sobolev: Option<NormReport>,
    /// `true` for `n = 1`, where there are no pairs to check.
    pub vacuous: bool,
}

/// Residual of `dA_j/dzbar_k + A_j dA_k/dz - dA_k/dzbar_j - A_k dA_j/dz`
/// for every pair `j < k` of rows.
pub fn integrability_residual(
    a: &BeltramiMatrix,
    s: f64,
    p: f64,
    route: ProductRoute,
) -> Result<IntegrabilityReport> {
    let n = a.n();
    let grid = *a.grid();
    if !(p > 1.0 && p.is_finite()) {
        return Err(AcsError::InvalidParameter(format!(
            "Sobolev exponent p = {p} not in (1, inf)"
        )));
    }
    let route = resolve(route, &[a.field()]);
    let entry = |j: usize, l: usize| a.field().component(j * n + l);
    let mut pairs = Vec::new();
    let mut residuals = Vec::new();
    for j in 0..n {
        for k in j + 1..n {
            let mut res = Field::zeros(grid, n);
            for l in 0..n {
                let mut r = d_zbar(&entry(j, l), k)?;
                r.axpy(Complex64::new(-1.0, 0.0), &d_zbar(&entry(k, l), j)?)?;
                for m in 0..n {
                    r.axpy(
                        Complex64::new(1.0, 0.0),
                        &product(&entry(j, m), &d_z(&entry(k, l), m)?, route),
                    )?;
                    r.axpy(
                        Complex64::new(-1.0, 0.0),
                        &product(&entry(k, m), &d_z(&entry(j, l), m)?, route),
                    )?;
                }
                res.set_component(l, &r);
            }
            pairs.push((j, k));
            residuals.push(res);
        }
    }
    let sup = residuals.iter().map(|r| r.sup_norm()).fold(0.0, f64::max);
    let mut sobolev: Option<NormReport> = None;
    for r in &residuals {
        let rep = sobolev_norm(r, s - 1.0, p)?;
        if sobolev.as_ref().map_or(true, |b| rep.value > b.value) {
            sobolev = Some(rep);
        }
    }
    Ok(IntegrabilityReport {
        vacuous: pairs.is_empty(),
        pairs,
        residuals,
        sup,
        sobolev,
    })
}
