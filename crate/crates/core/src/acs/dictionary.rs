use super::linalg::{cmat, inverse_with_condition, real_inverse, real_matmul, to_row_major, CMat};
use super::{BeltramiMatrix, StructureField};
use crate::error::{AcsError, Result};
use crate::grid::{Field, MapField};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);
/// Largest condition number accepted for pointwise inversions.
pub const MAX_CONDITION: f64 = 1e8;

/// Beltrami matrix of a chart: `A = M1 M0^{-1}` with `M0[k][l] = df_l/dz_k`
/// and `M1[j][l] = df_l/dzbar_j`, so `F` solves the first-order system
/// exactly at every node.
pub fn beltrami_from_map(f: &MapField) -> Result<BeltramiMatrix> {
    let grid = *f.grid();
    let n = grid.n();
    let d = f.derivatives();
    let mut out = Field::zeros(grid, n * n);
    let mut m0 = vec![ZERO; n * n];
    let mut m1 = vec![ZERO; n * n];
    for idx in 0..grid.len() {
        for a in 0..n {
            for l in 0..n {
                m0[a * n + l] = d.dz.comp(l * n + a)[idx];
                m1[a * n + l] = d.dzbar.comp(l * n + a)[idx];
            }
        }
        let (inv, cond) =
            inverse_with_condition(&cmat(n, &m0)).ok_or(AcsError::SingularJacobian {
                point: idx,
                condition: f64::INFINITY,
            })?;
        if cond > MAX_CONDITION {
            return Err(AcsError::SingularJacobian {
                point: idx,
                condition: cond,
            });
        }
        let a = cmat(n, &m1) * inv;
        for (c, v) in to_row_major(&a).into_iter().enumerate() {
            out.comp_mut(c)[idx] = v;
        }
    }
    BeltramiMatrix::new(out)
}

/// `T` maps real frame coefficients `(alpha_j, beta_j)` to complex frame
/// coefficients `(c_j, d_j)` on `(d/dz_j, d/dzbar_j)`.
fn frame_change(n: usize) -> (CMat, CMat) {
    let d = 2 * n;
    let mut t = DMatrix::from_element(d, d, ZERO);
    let mut t_inv = DMatrix::from_element(d, d, ZERO);
    for j in 0..n {
        t[(j, 2 * j)] = Complex64::new(1.0, 0.0);
        t[(j, 2 * j + 1)] = I;
        t[(n + j, 2 * j)] = Complex64::new(1.0, 0.0);
        t[(n + j, 2 * j + 1)] = -I;
        t_inv[(2 * j, j)] = Complex64::new(0.5, 0.0);
        t_inv[(2 * j, n + j)] = Complex64::new(0.5, 0.0);
        t_inv[(2 * j + 1, j)] = -0.5 * I;
        t_inv[(2 * j + 1, n + j)] = 0.5 * I;
    }
    (t, t_inv)
}

/// The structure whose `-i` eigenspace is spanned by
/// `dzbar_j - sum_k a_jk dz_k`.
pub fn structure_from_beltrami(a: &BeltramiMatrix) -> Result<StructureField> {
    let norm = a.sup_norm();
    if norm >= 1.0 {
        return Err(AcsError::SmallnessViolated { norm });
    }
    let grid = *a.grid();
    let n = grid.n();
    let d = 2 * n;
    let (t, t_inv) = frame_change(n);
    let mut out = Field::zeros(grid, d * d);
    for idx in 0..grid.len() {
        let am = cmat(n, &a.at(idx));
        // columns: Z_j = dz_j - sum_k conj(a_jk) dzbar_k, then Zbar_j
        let mut v = DMatrix::identity(d, d);
        let mut eig = DMatrix::from_element(d, d, ZERO);
        for j in 0..n {
            for k in 0..n {
                v[(k, n + j)] = -am[(j, k)];
                v[(n + k, j)] = -am[(j, k)].conj();
            }
            eig[(j, j)] = I;
            eig[(n + j, n + j)] = -I;
        }
        let v_inv = v
            .clone()
            .try_inverse()
            .ok_or(AcsError::SmallnessViolated { norm })?;
        let jc = &v * eig * v_inv;
        let jr = &t_inv * jc * &t;
        for r in 0..d {
            for c in 0..d {
                out.comp_mut(r * d + c)[idx] = Complex64::new(jr[(r, c)].re, 0.0);
            }
        }
    }
    StructureField::new(out)
}

/// Reads `A` off the `-i` eigenspace of `J`, written as a graph over the
/// antiholomorphic coordinate directions.
pub fn beltrami_from_structure(j: &StructureField) -> Result<BeltramiMatrix> {
    let grid = *j.grid();
    let n = grid.n();
    let d = 2 * n;
    let (t, t_inv) = frame_change(n);
    let mut out = Field::zeros(grid, n * n);
    for idx in 0..grid.len() {
        let jr = DMatrix::from_row_slice(d, d, &j.at(idx)).map(|v| Complex64::new(v, 0.0));
        let jc = &t * jr * &t_inv;
        let p = jc.view((0, 0), (n, n)).clone_owned() + DMatrix::identity(n, n) * I;
        let q = jc.view((0, n), (n, n)).clone_owned();
        let (p_inv, cond) =
            inverse_with_condition(&p).ok_or(AcsError::GraphConditionFailed { point: idx })?;
        if cond > MAX_CONDITION {
            return Err(AcsError::GraphConditionFailed { point: idx });
        }
        let x = -(p_inv * q);
        for r in 0..n {
            for c in 0..n {
                out.comp_mut(r * n + c)[idx] = -x[(c, r)];
            }
        }
    }
    BeltramiMatrix::new(out)
}

/// Constant real-linear change of coordinates `L` with `L J(0) L^{-1} = J_0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OriginChange {
    pub dim: usize,
    pub l: Vec<f64>,
    pub l_inv: Vec<f64>,
}

/// Conjugates `J` by the constant change of frame that takes `J(0)` to the
/// standard structure. The samples are kept on the same node labels.
pub fn normalize_origin(j: &StructureField) -> Result<(StructureField, OriginChange)> {
    let d = j.real_dim();
    let j0 = j.at(0);
    let apply = |v: &[f64]| -> Vec<f64> {
        (0..d)
            .map(|a| (0..d).map(|b| j0[a * d + b] * v[b]).sum())
            .collect()
    };
    let basis = |i: usize| -> Vec<f64> { (0..d).map(|a| if a == i { 1.0 } else { 0.0 }).collect() };
    // columns v_1, J v_1, v_2, J v_2, ... built greedily from coordinate vectors
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(d);
    for _ in 0..d / 2 {
        let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
        for i in 0..d {
            let v = basis(i);
            let jv = apply(&v);
            let mut trial = cols.clone();
            trial.push(v.clone());
            trial.push(jv.clone());
            let score = independence(&trial);
            if best.as_ref().map_or(true, |b| score > b.0 + 1e-12) {
                best = Some((score, v, jv));
            }
        }
        let (_, v, jv) = best.expect("coordinate vectors exist");
        cols.push(v);
        cols.push(jv);
    }
    let mut m = vec![0.0; d * d];
    for (c, col) in cols.iter().enumerate() {
        for r in 0..d {
            m[r * d + c] = col[r];
        }
    }
    let l = real_inverse(d, &m).ok_or_else(|| {
        AcsError::InvalidParameter("J(0) does not square to -I; no complex frame exists".into())
    })?;
    let l_inv = m;
    let grid = *j.grid();
    let mut out = Field::zeros(grid, d * d);
    for idx in 0..grid.len() {
        let conj = real_matmul(d, &real_matmul(d, &l, &j.at(idx)), &l_inv);
        for (c, v) in conj.into_iter().enumerate() {
            out.comp_mut(c)[idx] = Complex64::new(v, 0.0);
        }
    }
    Ok((
        StructureField::from_field_unchecked(out),
        OriginChange { dim: d, l, l_inv },
    ))
}

/// Smallest singular value of the matrix with the given columns (0 when
/// they are dependent), used to pick a well-conditioned complex frame.
fn independence(cols: &[Vec<f64>]) -> f64 {
    let d = cols[0].len();
    let m = DMatrix::from_fn(d, cols.len(), |r, c| cols[c][r]);
    m.singular_values().min()
}
