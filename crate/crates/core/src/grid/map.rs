//! Maps `C^n -> C^n` stored as a complex-linear-plus-antilinear part and a
//! periodic displacement: `f_l(z) = sum_k z_k P_kl + zbar_k Q_kl + d_l(z)`.

use super::calculus::Spectrum;
use super::interp::{InterpConfig, Interpolator};
use super::{Field, Grid};
use crate::error::{AcsError, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Constant part `z P + zbar Q` of a map (row-vector convention), `n x n`
/// row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearPart {
    pub n: usize,
    pub p: Vec<Complex64>,
    pub q: Vec<Complex64>,
}

impl LinearPart {
    pub fn identity(n: usize) -> Self {
        let mut p = vec![ZERO; n * n];
        for k in 0..n {
            p[k * n + k] = ONE;
        }
        Self {
            n,
            p,
            q: vec![ZERO; n * n],
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.n)
    }

    /// Applies the linear part to a complex point.
    pub fn apply(&self, z: &[Complex64], out: &mut [Complex64]) {
        let n = self.n;
        for l in 0..n {
            out[l] = (0..n)
                .map(|k| z[k] * self.p[k * n + l] + z[k].conj() * self.q[k * n + l])
                .sum();
        }
    }
}

/// Jacobian fields of a map: component `l * n + k` holds `df_l/dz_k`
/// (resp. `df_l/dzbar_k`).
#[derive(Debug, Clone)]
pub struct MapDerivatives {
    pub dz: Field,
    pub dzbar: Field,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapField {
    linear: LinearPart,
    disp: Field,
}

impl MapField {
    pub fn identity(grid: Grid) -> Self {
        Self {
            linear: LinearPart::identity(grid.n()),
            disp: Field::zeros(grid, grid.n()),
        }
    }

    /// `z -> z + disp(z)`.
    pub fn from_displacement(disp: Field) -> Result<Self> {
        let n = disp.grid().n();
        Self::new(LinearPart::identity(n), disp)
    }

    pub fn new(linear: LinearPart, disp: Field) -> Result<Self> {
        let n = disp.grid().n();
        if disp.ncomp() != n || linear.n != n {
            return Err(AcsError::DimensionMismatch(format!(
                "map on C^{n} needs {n} displacement components and an {n}x{n} linear part"
            )));
        }
        Ok(Self { linear, disp })
    }

    pub fn grid(&self) -> &Grid {
        self.disp.grid()
    }

    pub fn linear(&self) -> &LinearPart {
        &self.linear
    }

    pub fn displacement(&self) -> &Field {
        &self.disp
    }

    pub fn displacement_mut(&mut self) -> &mut Field {
        &mut self.disp
    }

    /// Value of the map at the origin (the linear part vanishes there).
    pub fn origin_value(&self) -> Vec<Complex64> {
        (0..self.grid().n())
            .map(|l| self.disp.at_origin(l))
            .collect()
    }

    /// Subtracts the origin value so that the map fixes 0.
    pub fn normalize(&mut self) {
        let o = self.origin_value();
        for (l, v) in o.into_iter().enumerate() {
            self.disp.comp_mut(l).iter_mut().for_each(|x| *x -= v);
        }
    }

    pub fn normalized(mut self) -> Self {
        self.normalize();
        self
    }

    /// Map values at every node (wrapped node coordinates as `z`), component-major.
    pub fn node_values(&self) -> Field {
        let grid = *self.grid();
        let n = grid.n();
        let mut out = self.disp.clone();
        let mut x = [0.0; 4];
        let mut z = [ZERO; 2];
        let mut lz = [ZERO; 2];
        for idx in 0..grid.len() {
            grid.wrapped_coords(idx, &mut x[..2 * n]);
            for k in 0..n {
                z[k] = Complex64::new(x[2 * k], x[2 * k + 1]);
            }
            self.linear.apply(&z[..n], &mut lz[..n]);
            for l in 0..n {
                out.comp_mut(l)[idx] += lz[l];
            }
        }
        out
    }

    /// Componentwise complex conjugate map.
    pub fn conj(&self) -> Self {
        Self {
            linear: LinearPart {
                n: self.linear.n,
                p: self.linear.q.iter().map(|v| v.conj()).collect(),
                q: self.linear.p.iter().map(|v| v.conj()).collect(),
            },
            disp: self.disp.conj(),
        }
    }

    /// Post-composition with a complex-linear map: `f -> f M` (row vector).
    pub fn then_linear(&self, m: &[Complex64]) -> Self {
        let n = self.linear.n;
        let mul = |a: &[Complex64]| -> Vec<Complex64> {
            let mut out = vec![ZERO; n * n];
            for r in 0..n {
                for c in 0..n {
                    out[r * n + c] = (0..n).map(|k| a[r * n + k] * m[k * n + c]).sum();
                }
            }
            out
        };
        let mut disp = Field::zeros(*self.grid(), n);
        for c in 0..n {
            for k in 0..n {
                disp.axpy_comp(c, m[k * n + c], &self.disp, k);
            }
        }
        Self {
            linear: LinearPart {
                n,
                p: mul(&self.linear.p),
                q: mul(&self.linear.q),
            },
            disp,
        }
    }

    pub fn derivatives(&self) -> MapDerivatives {
        let grid = *self.grid();
        let n = grid.n();
        let spec = Spectrum::of(&self.disp);
        let mut dz = Field::zeros(grid, n * n);
        let mut dzbar = Field::zeros(grid, n * n);
        for k in 0..n {
            let a = spec.d_z(k);
            let b = spec.d_zbar(k);
            for l in 0..n {
                let p = self.linear.p[k * n + l];
                let q = self.linear.q[k * n + l];
                dz.comp_mut(l * n + k)
                    .iter_mut()
                    .zip(a.comp(l))
                    .for_each(|(o, v)| *o = v + p);
                dzbar
                    .comp_mut(l * n + k)
                    .iter_mut()
                    .zip(b.comp(l))
                    .for_each(|(o, v)| *o = v + q);
            }
        }
        MapDerivatives { dz, dzbar }
    }

    /// `max(sup |f - id|, sup |D(f - id)|)` where the derivative gauge is
    /// `|A|_2 + |B|_2` for the pointwise real-linear map `v -> A v + B vbar`
    /// (exact for `n = 1`, an upper bound of the operator norm otherwise).
    /// The displacement term ignores the linear part, which is unbounded.
    pub fn c1_distance_from_identity(&self) -> f64 {
        let grid = *self.grid();
        let n = grid.n();
        let d = self.derivatives();
        let mut worst = self.disp.sup_norm();
        let mut a = [ZERO; 4];
        let mut b = [ZERO; 4];
        for idx in 0..grid.len() {
            for l in 0..n {
                for k in 0..n {
                    // row = output component, column = input direction
                    a[l * n + k] = d.dz.comp(l * n + k)[idx] - if l == k { ONE } else { ZERO };
                    b[l * n + k] = d.dzbar.comp(l * n + k)[idx];
                }
            }
            worst = worst.max(spectral_norm(&a[..n * n], n) + spectral_norm(&b[..n * n], n));
        }
        worst
    }

    /// Sup over nodes of the derivative gauge of the displacement alone.
    pub fn displacement_gradient_norm(&self) -> f64 {
        let id = MapField {
            linear: LinearPart::identity(self.grid().n()),
            disp: self.disp.clone(),
        };
        let grid = *self.grid();
        let n = grid.n();
        let d = id.derivatives();
        let mut worst: f64 = 0.0;
        let mut a = [ZERO; 4];
        let mut b = [ZERO; 4];
        for idx in 0..grid.len() {
            for l in 0..n {
                for k in 0..n {
                    a[l * n + k] = d.dz.comp(l * n + k)[idx] - if l == k { ONE } else { ZERO };
                    b[l * n + k] = d.dzbar.comp(l * n + k)[idx];
                }
            }
            worst = worst.max(spectral_norm(&a[..n * n], n) + spectral_norm(&b[..n * n], n));
        }
        worst
    }
}

impl Field {
    /// `self[c] += alpha * x[k]`.
    pub(crate) fn axpy_comp(&mut self, c: usize, alpha: Complex64, x: &Field, k: usize) {
        let src = x.comp(k).to_vec();
        self.comp_mut(c)
            .iter_mut()
            .zip(src)
            .for_each(|(o, v)| *o += alpha * v);
    }
}

/// Spectral norm of a complex `n x n` matrix, `n <= 2`.
pub fn spectral_norm(a: &[Complex64], n: usize) -> f64 {
    if n == 1 {
        return a[0].norm();
    }
    // largest eigenvalue of the Hermitian matrix A^* A
    let h11 = a[0].norm_sqr() + a[2].norm_sqr();
    let h22 = a[1].norm_sqr() + a[3].norm_sqr();
    let h12 = a[0].conj() * a[1] + a[2].conj() * a[3];
    let tr = h11 + h22;
    let det = h11 * h22 - h12.norm_sqr();
    let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
    (tr / 2.0 + disc).max(0.0).sqrt()
}

fn complex_to_real(z: &[Complex64], out: &mut [f64]) {
    for (k, v) in z.iter().enumerate() {
        out[2 * k] = v.re;
        out[2 * k + 1] = v.im;
    }
}

fn require_identity_linear(h: &MapField, what: &str) -> Result<()> {
    if !h.linear.is_identity() {
        return Err(AcsError::InvalidParameter(format!(
            "{what} needs a map of the form identity + periodic displacement"
        )));
    }
    Ok(())
}

/// Image points `H(z)` of every node, flattened real coordinates.
fn image_points(h: &MapField) -> Vec<f64> {
    let grid = *h.grid();
    let n = grid.n();
    let m = grid.dim();
    let mut pts = vec![0.0; grid.len() * m];
    let mut x = [0.0; 4];
    for idx in 0..grid.len() {
        grid.wrapped_coords(idx, &mut x[..m]);
        for l in 0..n {
            let d = h.disp.comp(l)[idx];
            pts[idx * m + 2 * l] = x[2 * l] + d.re;
            pts[idx * m + 2 * l + 1] = x[2 * l + 1] + d.im;
        }
    }
    pts
}

/// Inverse of `H = id + h` by fixed-point iteration `z <- zeta - h(z)` at
/// every node `zeta`, with `h` evaluated spectrally. Requires the displacement
/// gradient to be a contraction.
pub fn invert_map(h: &MapField, tol: f64, cfg: &InterpConfig) -> Result<MapField> {
    require_identity_linear(h, "invert_map")?;
    let grid = *h.grid();
    let n = grid.n();
    let m = grid.dim();
    let len = grid.len();
    let lip = h.displacement_gradient_norm();
    if lip >= 1.0 {
        return Err(AcsError::NoConvergence {
            iterations: 0,
            reason: format!("displacement gradient {lip:.3} is not a contraction"),
        });
    }
    let interp = Interpolator::auto(&h.disp, len, cfg);
    let mut zeta = vec![0.0; len * m];
    for idx in 0..len {
        grid.wrapped_coords(idx, &mut zeta[idx * m..(idx + 1) * m]);
    }

    let max_iter = 500;
    let mut z = zeta.clone();
    let mut residual = f64::INFINITY;
    for it in 0..max_iter {
        let d = interp.eval(&z)?;
        // residual of H(z) = zeta and the fixed-point update share the evaluation
        residual = 0.0;
        for idx in 0..len {
            let mut r2 = 0.0;
            for l in 0..n {
                let dv = d[l * len + idx];
                let re = zeta[idx * m + 2 * l] - dv.re;
                let im = zeta[idx * m + 2 * l + 1] - dv.im;
                r2 += (z[idx * m + 2 * l] - re).powi(2) + (z[idx * m + 2 * l + 1] - im).powi(2);
                z[idx * m + 2 * l] = re;
                z[idx * m + 2 * l + 1] = im;
            }
            residual = residual.max(r2.sqrt());
        }
        if residual <= tol * (1.0 - lip) {
            // |H(z_new) - zeta| <= lip |z_new - z_old|
            let mut disp = Field::zeros(grid, n);
            for idx in 0..len {
                for l in 0..n {
                    let v = Complex64::new(
                        z[idx * m + 2 * l] - zeta[idx * m + 2 * l],
                        z[idx * m + 2 * l + 1] - zeta[idx * m + 2 * l + 1],
                    );
                    disp.comp_mut(l)[idx] = v;
                }
            }
            let _ = it;
            return MapField::from_displacement(disp);
        }
    }
    Err(AcsError::NoConvergence {
        iterations: max_iter,
        reason: format!("map inversion residual {residual:.3e} above {tol:.1e}"),
    })
}

/// `u o H` sampled at the nodes; `H` must be identity plus periodic displacement.
pub fn compose(u: &Field, h: &MapField, cfg: &InterpConfig) -> Result<Field> {
    require_identity_linear(h, "compose")?;
    u.grid().check_same(h.grid())?;
    let pts = image_points(h);
    let vals = Interpolator::auto(u, h.grid().len(), cfg).eval(&pts)?;
    Field::from_values(*u.grid(), u.ncomp(), vals)
}

/// `G o H` as a map: the linear part of `G` is carried over and everything
/// else is folded into a periodic displacement.
pub fn compose_map(g: &MapField, h: &MapField, cfg: &InterpConfig) -> Result<MapField> {
    let dg = compose(&g.disp, h, cfg)?;
    let n = g.grid().n();
    let mut disp = dg;
    let hd = h.disp.clone();
    let hc = h.disp.conj();
    for l in 0..n {
        for k in 0..n {
            disp.axpy_comp(l, g.linear.p[k * n + l], &hd, k);
            disp.axpy_comp(l, g.linear.q[k * n + l], &hc, k);
        }
    }
    MapField::new(g.linear.clone(), disp)
}

#[allow(dead_code)]
pub(crate) fn to_real(z: &[Complex64], out: &mut [f64]) {
    complex_to_real(z, out)
}
