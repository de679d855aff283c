//! The maps `Phi` (the coefficient `E = B o H` forced by `H`) and `Psi` (the
//! divergence of `B` pulled back by `H`), and the preconditioner `G~`.

use crate::acs::linalg::{inv_small, mul_small};
use crate::acs::BeltramiMatrix;
use crate::error::{AcsError, Result};
use crate::grid::{inv_laplacian, Field, MapDerivatives, MapField, Spectrum};
use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
/// Largest condition number accepted for the pointwise factors.
pub const MAX_CONDITION: f64 = 1e8;

/// Sign `s` in `D_H Psi(id, 0) h = s * Laplacian(h) / 4`, confirmed by the
/// finite-difference tests; the Newton update is `H <- H - s * G~(Psi)`.
pub const LINEARIZATION_SIGN: f64 = -1.0;

/// `E = -(dHbar/dzbar - A dHbar/dz)^{-1} (dH/dzbar - A dH/dz)`, the matrix
/// that `B o H` must equal for `G o H` to solve the system with
/// coefficient `A`.
pub fn phi(h: &MapField, a: &BeltramiMatrix) -> Result<BeltramiMatrix> {
    phi_with(&h.derivatives(), a)
}

fn phi_with(d: &MapDerivatives, a: &BeltramiMatrix) -> Result<BeltramiMatrix> {
    let grid = *a.grid();
    grid.check_same(d.dz.grid())?;
    let n = grid.n();
    let nn = n * n;
    let mut out = vec![ZERO; nn * grid.len()];
    let acomp: Vec<&[Complex64]> = (0..nn).map(|c| a.field().comp(c)).collect();
    // rows index the differentiation variable, columns the component
    let dz: Vec<&[Complex64]> = (0..nn).map(|i| d.dz.comp((i % n) * n + i / n)).collect();
    let dzb: Vec<&[Complex64]> = (0..nn).map(|i| d.dzbar.comp((i % n) * n + i / n)).collect();
    let (mut am, mut hz, mut hzb, mut hbz, mut hbzb) =
        ([ZERO; 4], [ZERO; 4], [ZERO; 4], [ZERO; 4], [ZERO; 4]);
    for idx in 0..grid.len() {
        for i in 0..nn {
            am[i] = acomp[i][idx];
            hz[i] = dz[i][idx];
            hzb[i] = dzb[i][idx];
            hbzb[i] = hz[i].conj();
            hbz[i] = hzb[i].conj();
        }
        let ahbz = mul_small(n, &am, &hbz);
        let ahz = mul_small(n, &am, &hz);
        let mut s = [ZERO; 4];
        let mut t = [ZERO; 4];
        for i in 0..nn {
            s[i] = hbzb[i] - ahbz[i];
            t[i] = hzb[i] - ahz[i];
        }
        let Some((s_inv, cond)) = inv_small(n, &s) else {
            return Err(AcsError::SingularFactor {
                point: idx,
                condition: f64::INFINITY,
            });
        };
        if cond > MAX_CONDITION {
            return Err(AcsError::SingularFactor {
                point: idx,
                condition: cond,
            });
        }
        let e = mul_small(n, &s_inv, &t);
        for c in 0..nn {
            out[c * grid.len() + idx] = -e[c];
        }
    }
    BeltramiMatrix::new(Field::from_values(grid, nn, out)?)
}

/// Derivatives of the inverse map at the image points, `dk_m/dzeta_j o H`
/// and `dkbar_m/dzeta_j o H` (component `m * n + j`), read off the inverse
/// of the complex Jacobian of `H`.
pub(crate) fn inverse_derivatives(d: &MapDerivatives) -> Result<(Field, Field)> {
    let grid = *d.dz.grid();
    let n = grid.n();
    let nn = n * n;
    let len = grid.len();
    let mut pk = vec![ZERO; nn * len];
    let mut qk = vec![ZERO; nn * len];
    let dz: Vec<&[Complex64]> = (0..nn).map(|c| d.dz.comp(c)).collect();
    let dzb: Vec<&[Complex64]> = (0..nn).map(|c| d.dzbar.comp(c)).collect();
    let (mut p, mut q, mut pb, mut qb) = ([ZERO; 4], [ZERO; 4], [ZERO; 4], [ZERO; 4]);
    for idx in 0..len {
        // acting convention: p[l][k] = dh_l/dz_k, q[l][k] = dh_l/dzbar_k
        for c in 0..nn {
            p[c] = dz[c][idx];
            q[c] = dzb[c][idx];
            pb[c] = p[c].conj();
            qb[c] = q[c].conj();
        }
        let singular = |condition| AcsError::SingularJacobian {
            point: idx,
            condition,
        };
        let Some((pb_inv, c1)) = inv_small(n, &pb) else {
            return Err(singular(f64::INFINITY));
        };
        let pq = mul_small(n, &pb_inv, &qb);
        let corr = mul_small(n, &q, &pq);
        let mut schur = [ZERO; 4];
        for i in 0..nn {
            schur[i] = p[i] - corr[i];
        }
        let Some((tl, c2)) = inv_small(n, &schur) else {
            return Err(singular(f64::INFINITY));
        };
        if c1.max(c2) > MAX_CONDITION {
            return Err(singular(c1.max(c2)));
        }
        let bl = mul_small(n, &pq, &tl);
        for c in 0..nn {
            pk[c * len + idx] = tl[c];
            qk[c * len + idx] = -bl[c];
        }
    }
    Ok((
        Field::from_values(grid, nn, pk)?,
        Field::from_values(grid, nn, qk)?,
    ))
}

/// `Psi_l = sum_j dB_jl/dzeta_j o H`, evaluated through the chain rule with
/// `E = Phi(H, A)` in place of `B o H`; no map inversion is needed.
pub fn psi(h: &MapField, a: &BeltramiMatrix) -> Result<Field> {
    Ok(phi_psi(h, a)?.1)
}

/// `(Phi(H, A), Psi(H, A))` sharing the derivatives of `H`.
pub fn phi_psi(h: &MapField, a: &BeltramiMatrix) -> Result<(BeltramiMatrix, Field)> {
    let d = h.derivatives();
    let e = phi_with(&d, a)?;
    let (pk, qk) = inverse_derivatives(&d)?;
    let grid = *a.grid();
    let n = grid.n();
    let spec = Spectrum::of(e.field());
    let mut out = Field::zeros(grid, n);
    for m in 0..n {
        let ez = spec.d_z(m);
        let ezb = spec.d_zbar(m);
        for j in 0..n {
            let p = pk.comp(m * n + j);
            let q = qk.comp(m * n + j);
            for l in 0..n {
                let (a1, a2) = (ez.comp(j * n + l), ezb.comp(j * n + l));
                let o = out.comp_mut(l);
                for idx in 0..grid.len() {
                    o[idx] += p[idx] * a1[idx] + q[idx] * a2[idx];
                }
            }
        }
    }
    Ok((e, out))
}

/// `G~ h = 4 (G h - (G h)(0))` with `G` the mean-free periodic inverse
/// Laplacian: `Laplacian(G~ h) / 4 = h - mean(h)` and `G~ h (0) = 0`.
pub fn gtilde(h: &Field) -> Field {
    let mut v = inv_laplacian(h).scale(Complex64::new(4.0, 0.0));
    for c in 0..v.ncomp() {
        let o = v.at_origin(c);
        v.comp_mut(c).iter_mut().for_each(|x| *x -= o);
    }
    v
}
