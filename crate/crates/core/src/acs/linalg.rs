//! Pointwise dense linear algebra on tiny matrices (row-major slices).

use nalgebra::DMatrix;
use num_complex::Complex64;

pub(crate) type CMat = DMatrix<Complex64>;

pub(crate) fn cmat(n: usize, data: &[Complex64]) -> CMat {
    DMatrix::from_row_slice(n, n, data)
}

pub(crate) fn to_row_major(m: &CMat) -> Vec<Complex64> {
    let (r, c) = m.shape();
    let mut out = Vec::with_capacity(r * c);
    for i in 0..r {
        for j in 0..c {
            out.push(m[(i, j)]);
        }
    }
    out
}

fn frob(m: &CMat) -> f64 {
    m.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Inverse together with the condition proxy `|M|_F |M^-1|_F`; `None` when
/// the matrix is exactly singular.
pub(crate) fn inverse_with_condition(m: &CMat) -> Option<(CMat, f64)> {
    let inv = m.clone().try_inverse()?;
    let cond = frob(m) * frob(&inv);
    if cond.is_finite() {
        Some((inv, cond))
    } else {
        None
    }
}

pub(crate) fn real_inverse(n: usize, data: &[f64]) -> Option<Vec<f64>> {
    let m = DMatrix::from_row_slice(n, n, data);
    let inv = m.try_inverse()?;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            out.push(inv[(i, j)]);
        }
    }
    Some(out)
}

pub(crate) fn real_matmul(n: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

/// Product of two row-major `n x n` matrices, `n <= 2`.
#[inline]
pub(crate) fn mul_small(n: usize, a: &[Complex64], b: &[Complex64]) -> [Complex64; 4] {
    let mut out = [Complex64::new(0.0, 0.0); 4];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = (0..n).map(|k| a[i * n + k] * b[k * n + j]).sum();
        }
    }
    out
}

/// Inverse of a row-major `n x n` matrix (`n <= 2`) with the condition proxy
/// `|M|_F |M^-1|_F`.
#[inline]
pub(crate) fn inv_small(n: usize, a: &[Complex64]) -> Option<([Complex64; 4], f64)> {
    let zero = Complex64::new(0.0, 0.0);
    let (inv, norm) = if n == 1 {
        if a[0] == zero {
            return None;
        }
        ([1.0 / a[0], zero, zero, zero], a[0].norm())
    } else {
        let det = a[0] * a[3] - a[1] * a[2];
        if det == zero {
            return None;
        }
        let inv = [a[3] / det, -a[1] / det, -a[2] / det, a[0] / det];
        (inv, a[..4].iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt())
    };
    let inv_norm = inv[..n * n]
        .iter()
        .map(|v| v.norm_sqr())
        .sum::<f64>()
        .sqrt();
    let cond = norm * inv_norm;
    cond.is_finite().then_some((inv, cond))
}
