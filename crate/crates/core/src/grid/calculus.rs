//! Fourier multipliers, complex derivatives, Laplacian inversion and dilation.
//!
//! Frequencies are the signed FFT bins; the unpaired bin is treated as `-N/2`
//! in every multiplier, so `4 * sum_j d_z d_zbar` equals the spectral
//! Laplacian on every mode.

use super::fft::{fft_1d, fft_nd};
use super::{Field, Grid};
use crate::error::{AcsError, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Unnormalised DFT coefficients of a field, same layout as [`Field`].
#[derive(Debug, Clone)]
pub struct Spectrum {
    grid: Grid,
    ncomp: usize,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn of(u: &Field) -> Self {
        let grid = *u.grid();
        let mut coeffs = u.values().to_vec();
        for chunk in coeffs.chunks_mut(grid.len()) {
            fft_nd(chunk, grid.size(), grid.dim(), false);
        }
        Self {
            grid,
            ncomp: u.ncomp(),
            coeffs,
        }
    }

    /// Builds a spectrum from normalised coefficients (see [`Spectrum::normalized`]).
    pub fn from_normalized(grid: Grid, ncomp: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != ncomp * grid.len() {
            return Err(AcsError::InvalidParameter(format!(
                "expected {} coefficients, got {}",
                ncomp * grid.len(),
                coeffs.len()
            )));
        }
        let s = grid.len() as f64;
        Ok(Self {
            grid,
            ncomp,
            coeffs: coeffs.into_iter().map(|c| c * s).collect(),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn ncomp(&self) -> usize {
        self.ncomp
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Fourier coefficients normalised so that `u(x) = sum_k c_k e^{i k.x 2pi/L}`.
    pub fn normalized(&self) -> Vec<Complex64> {
        let s = 1.0 / self.grid.len() as f64;
        self.coeffs.iter().map(|c| c * s).collect()
    }

    /// Multiplies every coefficient by `symbol(freqs)` and transforms back.
    pub fn apply<S>(&self, symbol: S) -> Field
    where
        S: Fn(&[i64]) -> Complex64,
    {
        self.apply_table(&symbol_table(&self.grid, symbol))
    }

    pub(crate) fn apply_table(&self, table: &[Complex64]) -> Field {
        let mut out = self.coeffs.clone();
        for chunk in out.chunks_mut(self.grid.len()) {
            for (c, s) in chunk.iter_mut().zip(table) {
                *c *= s;
            }
            fft_nd(chunk, self.grid.size(), self.grid.dim(), true);
        }
        Field::from_values(self.grid, self.ncomp, out).expect("multiplier output is finite")
    }

    pub fn to_field(&self) -> Field {
        let mut out = self.coeffs.clone();
        for chunk in out.chunks_mut(self.grid.len()) {
            fft_nd(chunk, self.grid.size(), self.grid.dim(), true);
        }
        Field::from_values(self.grid, self.ncomp, out).expect("inverse transform is finite")
    }

    /// Real partial derivative along `axis` (0-based, `< 2n`).
    pub fn partial(&self, axis: usize) -> Field {
        let w = self.grid.wavenumber();
        self.apply(|k| I * (w * k[axis] as f64))
    }

    /// `d/dz_j = (d/dx_j - i d/dy_j) / 2`, `j` 0-based.
    pub fn d_z(&self, j: usize) -> Field {
        let w = self.grid.wavenumber();
        self.apply(|k| dz_symbol(w, k, j))
    }

    /// `d/dzbar_j = (d/dx_j + i d/dy_j) / 2`, `j` 0-based.
    pub fn d_zbar(&self, j: usize) -> Field {
        let w = self.grid.wavenumber();
        self.apply(|k| dzbar_symbol(w, k, j))
    }
}

#[inline]
pub(crate) fn dz_symbol(w: f64, k: &[i64], j: usize) -> Complex64 {
    // (i xi_x - i (i xi_y)) / 2 = (i xi_x + xi_y) / 2
    0.5 * w * Complex64::new(k[2 * j + 1] as f64, k[2 * j] as f64)
}

#[inline]
pub(crate) fn dzbar_symbol(w: f64, k: &[i64], j: usize) -> Complex64 {
    // (i xi_x + i (i xi_y)) / 2 = (i xi_x - xi_y) / 2
    0.5 * w * Complex64::new(-(k[2 * j + 1] as f64), k[2 * j] as f64)
}

/// Evaluates `symbol` on every frequency vector of the grid.
pub(crate) fn symbol_table<S>(grid: &Grid, symbol: S) -> Vec<Complex64>
where
    S: Fn(&[i64]) -> Complex64,
{
    let m = grid.dim();
    let size = grid.size();
    let freqs: Vec<i64> = (0..size).map(|i| grid.freq(i)).collect();
    let mut d = [0usize; 4];
    let mut k = [0i64; 4];
    let mut out = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        for a in 0..m {
            k[a] = freqs[d[a]];
        }
        out.push(symbol(&k[..m]));
        // odometer, last axis fastest
        for a in (0..m).rev() {
            d[a] += 1;
            if d[a] < size {
                break;
            }
            d[a] = 0;
        }
    }
    out
}

/// Applies the Fourier multiplier `symbol` (a function of the signed integer
/// frequency vector) to every component of `u`.
pub fn apply_multiplier<S>(u: &Field, symbol: S) -> Result<Field>
where
    S: Fn(&[i64]) -> Complex64,
{
    let table = symbol_table(u.grid(), symbol);
    if let Some(i) = table
        .iter()
        .position(|s| !(s.re.is_finite() && s.im.is_finite()))
    {
        return Err(AcsError::NonFinite(format!(
            "symbol value at frequency bin {i}"
        )));
    }
    Ok(Spectrum::of(u).apply_table(&table))
}

fn check_index(u: &Field, j: usize) -> Result<()> {
    if j >= u.grid().n() {
        return Err(AcsError::IndexOutOfRange {
            index: j,
            limit: u.grid().n(),
        });
    }
    Ok(())
}

/// `d u / d z_j` for every component (0-based `j`).
pub fn d_z(u: &Field, j: usize) -> Result<Field> {
    check_index(u, j)?;
    Ok(Spectrum::of(u).d_z(j))
}

/// `d u / d zbar_j` for every component (0-based `j`).
pub fn d_zbar(u: &Field, j: usize) -> Result<Field> {
    check_index(u, j)?;
    Ok(Spectrum::of(u).d_zbar(j))
}

/// Real partial derivative along `axis < 2n`.
pub fn partial(u: &Field, axis: usize) -> Result<Field> {
    if axis >= u.grid().dim() {
        return Err(AcsError::IndexOutOfRange {
            index: axis,
            limit: u.grid().dim(),
        });
    }
    Ok(Spectrum::of(u).partial(axis))
}

pub fn laplacian(u: &Field) -> Field {
    let w2 = u.grid().wavenumber().powi(2);
    Spectrum::of(u).apply(|k| {
        let k2: i64 = k.iter().map(|v| v * v).sum();
        Complex64::new(-w2 * k2 as f64, 0.0)
    })
}

/// Mean-zero periodic solution of `Delta v = h - mean(h)`.
pub fn inv_laplacian(h: &Field) -> Field {
    let w2 = h.grid().wavenumber().powi(2);
    Spectrum::of(h).apply(|k| {
        let k2: i64 = k.iter().map(|v| v * v).sum();
        if k2 == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(-1.0 / (w2 * k2 as f64), 0.0)
        }
    })
}

/// Band-limited interpolation of `u` onto the grid with `factor` times as
/// many samples per axis (zero padding in frequency; the unpaired mode is
/// split evenly between `+-N/2`).
pub fn refine(u: &Field, factor: usize) -> Result<Field> {
    let grid = *u.grid();
    if factor == 0 || !factor.is_power_of_two() {
        return Err(AcsError::InvalidParameter(format!(
            "refinement factor must be a power of two, got {factor}"
        )));
    }
    if factor == 1 {
        return Ok(u.clone());
    }
    let fine = Grid::new(grid.n(), grid.size() * factor, grid.period())?;
    let m = grid.dim();
    let (n, nf) = (grid.size() as i64, fine.size() as i64);
    let spec = Spectrum::of(u);
    let scale = (fine.len() / grid.len()) as f64;
    let mut out = vec![Complex64::new(0.0, 0.0); fine.len() * u.ncomp()];
    let mut d = [0usize; 4];
    for idx in 0..grid.len() {
        grid.digits(idx, &mut d[..m]);
        // every axis contributes one or two fine bins
        let mut targets: Vec<(usize, f64)> = vec![(0, scale)];
        for &digit in &d[..m] {
            let k = grid.freq(digit);
            let opts: Vec<(i64, f64)> = if k == -n / 2 {
                vec![(k, 0.5), (-k, 0.5)]
            } else {
                vec![(k, 1.0)]
            };
            targets = targets
                .iter()
                .flat_map(|&(t, w)| {
                    opts.iter()
                        .map(move |&(k, f)| (t * nf as usize + k.rem_euclid(nf) as usize, w * f))
                })
                .collect();
        }
        for c in 0..u.ncomp() {
            let v = spec.coeffs()[c * grid.len() + idx];
            for &(t, w) in &targets {
                out[c * fine.len() + t] += v * w;
            }
        }
    }
    for chunk in out.chunks_mut(fine.len()) {
        fft_nd(chunk, fine.size(), m, true);
    }
    Field::from_values(fine, u.ncomp(), out)
}

/// Samples `z -> u(t z)` (wrapped coordinates, origin fixed) by trigonometric
/// interpolation. The dilation is separable, so it is applied axis by axis.
pub fn resample_dilate(u: &Field, t: f64) -> Result<Field> {
    if !(0.0..=1.0).contains(&t) {
        return Err(AcsError::InvalidParameter(format!(
            "dilation factor {t} outside [0, 1]"
        )));
    }
    if t == 1.0 {
        return Ok(u.clone());
    }
    let grid = *u.grid();
    let size = grid.size();
    let weights = dilation_matrix(&grid, t);
    let mut out = u.values().to_vec();
    let m = grid.dim();
    let mut line = vec![Complex64::new(0.0, 0.0); size];
    let mut res = vec![Complex64::new(0.0, 0.0); size];
    for chunk in out.chunks_mut(grid.len()) {
        for axis in 0..m {
            let stride = size.pow((m - 1 - axis) as u32);
            let block = stride * size;
            for outer in (0..chunk.len()).step_by(block) {
                for inner in 0..stride {
                    let base = outer + inner;
                    for (j, l) in line.iter_mut().enumerate() {
                        *l = chunk[base + j * stride];
                    }
                    for (i, r) in res.iter_mut().enumerate() {
                        let row = &weights[i * size..(i + 1) * size];
                        *r = row.iter().zip(&line).map(|(w, v)| w * v).sum();
                    }
                    for (j, r) in res.iter().enumerate() {
                        chunk[base + j * stride] = *r;
                    }
                }
            }
        }
    }
    Field::from_values(grid, u.ncomp(), out)
}

/// Row `i` holds the weights that evaluate the 1D trigonometric interpolant of
/// the node samples at `t * x_i`.
fn dilation_matrix(grid: &Grid, t: f64) -> Vec<Complex64> {
    let size = grid.size();
    let mut w = vec![Complex64::new(0.0, 0.0); size * size];
    for i in 0..size {
        let theta = 2.0 * PI * t * grid.wrapped(i) / grid.period();
        // weights are the inverse DFT of the evaluation functional
        let mut row: Vec<Complex64> = (0..size)
            .map(|b| {
                let k = grid.freq(b);
                let e = if k == -(size as i64) / 2 {
                    // symmetric treatment of the unpaired mode keeps real data real
                    Complex64::new((k as f64 * theta).cos(), 0.0)
                } else {
                    Complex64::from_polar(1.0, k as f64 * theta)
                };
                e / size as f64
            })
            .collect();
        // evaluation = sum_k e_k * fft(u)_k = sum_j u_j * (sum_k e_k e^{-2 pi i k j / N})
        fft_1d(&mut row, false);
        w[i * size..(i + 1) * size].copy_from_slice(&row);
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, size: usize) -> Grid {
        Grid::new(n, size, 2.0 * PI).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn identity_multiplier_round_trips() {
        let g = grid(1, 32);
        let u = Field::from_fn(g, 2, |c_, x| {
            Complex64::new((x[0] + c_ as f64).sin(), x[1].cos() * x[0])
        });
        let v = apply_multiplier(&u, |_| c(1.0)).unwrap();
        assert!(v.sub(&u).unwrap().sup_norm() <= 1e-13 * u.sup_norm());
    }

    #[test]
    fn eigenfunction_multipliers() {
        let g = grid(1, 32);
        let u = Field::from_fn(g, 1, |_, x| Complex64::from_polar(1.0, x[0]));
        let v = apply_multiplier(&u, |k| I * k[0] as f64).unwrap();
        assert!(v.sub(&u.scale(I)).unwrap().sup_norm() < 1e-13);

        let s = Field::from_fn(g, 1, |_, x| c((2.0 * x[0]).sin()));
        let v = apply_multiplier(&s, |k| c((k[0] * k[0] + k[1] * k[1]) as f64)).unwrap();
        assert!(v.sub(&s.scale(c(4.0))).unwrap().sup_norm() < 1e-12);
    }

    #[test]
    fn non_finite_symbol_is_rejected() {
        let g = grid(1, 8);
        let u = Field::zeros(g, 1);
        let r = apply_multiplier(&u, |k| c(1.0 / k[0] as f64));
        assert!(matches!(r, Err(AcsError::NonFinite(_))));
    }

    #[test]
    fn complex_derivatives_of_simple_fields() {
        let g = grid(1, 32);
        let k = Field::constant(g, Complex64::new(2.0, -1.0));
        assert!(d_zbar(&k, 0).unwrap().sup_norm() < 1e-14);

        let u = Field::from_fn(g, 1, |_, x| c(x[0].sin()));
        let half_cos = Field::from_fn(g, 1, |_, x| c(0.5 * x[0].cos()));
        assert!(d_z(&u, 0).unwrap().sub(&half_cos).unwrap().sup_norm() < 1e-13);
        assert!(d_zbar(&u, 0).unwrap().sub(&half_cos).unwrap().sup_norm() < 1e-13);
        assert!(matches!(d_z(&u, 1), Err(AcsError::IndexOutOfRange { .. })));
    }

    #[test]
    fn dzbar_matches_central_differences() {
        // u = e^{i x} e^{i y}; oracle: fourth-order central differences
        let size = 256;
        let g = grid(1, size);
        let h = g.spacing();
        let u = Field::from_fn(g, 1, |_, x| Complex64::from_polar(1.0, x[0] + x[1]));
        let f = |x: f64, y: f64| Complex64::from_polar(1.0, x + y);
        let spectral = d_zbar(&u, 0).unwrap();
        let mut worst: f64 = 0.0;
        let mut xs = [0.0; 2];
        for idx in (0..g.len()).step_by(97) {
            g.wrapped_coords(idx, &mut xs);
            let (x, y) = (xs[0], xs[1]);
            let dx = (-f(x + 2.0 * h, y) + 8.0 * f(x + h, y) - 8.0 * f(x - h, y)
                + f(x - 2.0 * h, y))
                / (12.0 * h);
            let dy = (-f(x, y + 2.0 * h) + 8.0 * f(x, y + h) - 8.0 * f(x, y - h)
                + f(x, y - 2.0 * h))
                / (12.0 * h);
            let fd = 0.5 * (dx + I * dy);
            worst = worst.max((spectral.comp(0)[idx] - fd).norm() / fd.norm());
        }
        assert!(worst <= 1e-6, "relative error {worst}");
        // closed form of the same quantity
        let expect = 0.5 * I * Complex64::new(1.0, 1.0);
        assert!((spectral.comp(0)[5] - expect * u.comp(0)[5]).norm() < 1e-12);
    }

    #[test]
    fn inverse_laplacian_cases() {
        let g = grid(1, 32);
        assert!(inv_laplacian(&Field::zeros(g, 1)).sup_norm() == 0.0);
        let s = Field::from_fn(g, 1, |_, x| c(x[0].sin()));
        assert!(inv_laplacian(&s).add(&s).unwrap().sup_norm() < 1e-13);
        let k = Field::constant(g, c(3.5));
        assert!(inv_laplacian(&k).sup_norm() < 1e-14);
    }

    #[test]
    fn refinement_interpolates_band_limited_data() {
        let g = Grid::new(1, 16, 2.0 * PI).unwrap();
        let f = |x: &[f64]| {
            Complex64::new(
                (3.0 * x[0]).sin() * (8.0 * x[1]).cos(),
                (x[0] - 2.0 * x[1]).cos(),
            )
        };
        let u = Field::from_fn(g, 1, |_, x| f(x));
        let r = refine(&u, 4).unwrap();
        assert_eq!(r.grid().size(), 64);
        let want = Field::from_fn(*r.grid(), 1, |_, x| f(x));
        assert!(r.sub(&want).unwrap().sup_norm() < 1e-13);
        assert!(r.values().iter().all(|z| z.im.is_finite()));
        assert!(refine(&u, 3).is_err());
    }

    #[test]
    fn dilation_cases() {
        let g = grid(1, 256);
        let u = Field::from_fn(g, 1, |_, x| c(x[0].sin()));
        assert_eq!(resample_dilate(&u, 1.0).unwrap(), u);

        let w = Field::from_fn(g, 1, |_, x| {
            Complex64::new(1.0 + x[0].cos() * x[1].sin(), x[1].cos())
        });
        let z = resample_dilate(&w, 0.0).unwrap();
        let origin = w.at_origin(0);
        assert!(z.comp(0).iter().all(|v| (v - origin).norm() < 1e-12));

        let half = resample_dilate(&u, 0.5).unwrap();
        let oracle = Field::from_fn(g, 1, |_, x| c((0.5 * x[0]).sin()));
        assert!(half.sub(&oracle).unwrap().sup_norm() <= 1e-10);
        assert!(resample_dilate(&u, 1.5).is_err());
    }
}
