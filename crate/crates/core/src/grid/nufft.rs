//! Type-2 non-uniform FFT: evaluates a trigonometric polynomial given on the
//! grid at arbitrary points, using an exponential-of-semicircle spreading
//! kernel on a 2x oversampled grid.

use super::fft::fft_nd;
use super::Grid;
use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub(crate) struct Nufft {
    dim: usize,
    fine: usize,
    width: usize,
    beta: f64,
    /// Fine-grid spacing in angle units.
    h: f64,
    /// Kernel half-width in angle units.
    alpha: f64,
    /// One oversampled array per component.
    planes: Vec<Vec<Complex64>>,
    period: f64,
}

/// Kernel width for a requested relative accuracy.
pub(crate) fn width_for_tol(tol: f64) -> usize {
    let digits = (-tol.max(1e-16).log10()).ceil() as usize;
    (digits + 1).clamp(4, 16)
}

impl Nufft {
    /// `coeffs` are normalised Fourier coefficients, one `N^m` block per component.
    pub(crate) fn new(grid: &Grid, coeffs: &[Vec<Complex64>], tol: f64) -> Self {
        let size = grid.size();
        let dim = grid.dim();
        let width = width_for_tol(tol);
        let beta = 2.30 * width as f64;
        let fine = (2 * size).max(2 * width).next_power_of_two();
        let h = 2.0 * PI / fine as f64;
        let alpha = width as f64 * h / 2.0;

        let ft = kernel_transform(beta, alpha, size);
        // per-axis correction h / phi_hat(k) for k in [-N/2, N/2]
        let corr = |k: i64| h / ft[(k + size as i64 / 2) as usize];

        let fine_len = fine.pow(dim as u32);
        let mut planes = Vec::with_capacity(coeffs.len());
        let mut digits = [0usize; 4];
        for block in coeffs {
            let mut plane = vec![Complex64::new(0.0, 0.0); fine_len];
            for (idx, &c) in block.iter().enumerate() {
                if c == Complex64::new(0.0, 0.0) {
                    continue;
                }
                grid.digits(idx, &mut digits[..dim]);
                // the unpaired mode is split evenly between -N/2 and +N/2
                let nyq: Vec<usize> = (0..dim)
                    .filter(|&a| grid.freq(digits[a]) == -(size as i64) / 2)
                    .collect();
                let split = 0.5f64.powi(nyq.len() as i32);
                for mask in 0..(1usize << nyq.len()) {
                    let mut fidx = 0usize;
                    let mut w = c * split;
                    for a in 0..dim {
                        let mut k = grid.freq(digits[a]);
                        if let Some(p) = nyq.iter().position(|&b| b == a) {
                            if mask & (1 << p) != 0 {
                                k = -k;
                            }
                        }
                        w *= corr(k);
                        fidx = fidx * fine + k.rem_euclid(fine as i64) as usize;
                    }
                    plane[fidx] += w;
                }
            }
            fft_nd(&mut plane, fine, dim, true);
            let s = fine_len as f64;
            plane.iter_mut().for_each(|v| *v *= s);
            planes.push(plane);
        }

        Self {
            dim,
            fine,
            width,
            beta,
            h,
            alpha,
            planes,
            period: grid.period(),
        }
    }

    #[inline]
    fn kernel(&self, z: f64) -> f64 {
        let t = 1.0 - z * z;
        if t <= 0.0 {
            0.0
        } else {
            (self.beta * (t.sqrt() - 1.0)).exp()
        }
    }

    /// Evaluates every component at one physical point.
    pub(crate) fn eval_point(&self, x: &[f64], out: &mut [Complex64]) {
        let w = self.width;
        let mut idx = [[0usize; 16]; 4];
        let mut ker = [[0.0f64; 16]; 4];
        for a in 0..self.dim {
            let theta = (2.0 * PI * x[a] / self.period).rem_euclid(2.0 * PI);
            let j0 = (theta / self.h - w as f64 / 2.0).ceil() as i64;
            for s in 0..w {
                let j = j0 + s as i64;
                ker[a][s] = self.kernel((theta - j as f64 * self.h) / self.alpha);
                idx[a][s] = j.rem_euclid(self.fine as i64) as usize;
            }
        }
        for (o, plane) in out.iter_mut().zip(&self.planes) {
            *o = match self.dim {
                2 => {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for s0 in 0..w {
                        let row = idx[0][s0] * self.fine;
                        let mut inner = Complex64::new(0.0, 0.0);
                        for s1 in 0..w {
                            inner += plane[row + idx[1][s1]] * ker[1][s1];
                        }
                        acc += inner * ker[0][s0];
                    }
                    acc
                }
                _ => {
                    let f = self.fine;
                    let mut acc = Complex64::new(0.0, 0.0);
                    for s0 in 0..w {
                        let b0 = idx[0][s0] * f;
                        let mut a1 = Complex64::new(0.0, 0.0);
                        for s1 in 0..w {
                            let b1 = (b0 + idx[1][s1]) * f;
                            let mut a2 = Complex64::new(0.0, 0.0);
                            for s2 in 0..w {
                                let b2 = (b1 + idx[2][s2]) * f;
                                let mut a3 = Complex64::new(0.0, 0.0);
                                for s3 in 0..w {
                                    a3 += plane[b2 + idx[3][s3]] * ker[3][s3];
                                }
                                a2 += a3 * ker[2][s2];
                            }
                            a1 += a2 * ker[1][s1];
                        }
                        acc += a1 * ker[0][s0];
                    }
                    acc
                }
            };
        }
    }
}

/// Fourier transform of the kernel at integer frequencies `-N/2..=N/2`,
/// by Gauss-Legendre quadrature.
fn kernel_transform(beta: f64, alpha: f64, size: usize) -> Vec<f64> {
    let (nodes, weights) = gauss_legendre(200);
    let phi: Vec<f64> = nodes
        .iter()
        .map(|s| (beta * ((1.0 - s * s).sqrt() - 1.0)).exp())
        .collect();
    let half = size as i64 / 2;
    (-half..=half)
        .map(|k| {
            let mut acc = 0.0;
            for ((s, w), p) in nodes.iter().zip(&weights).zip(&phi) {
                acc += w * p * (k as f64 * alpha * s).cos();
            }
            alpha * acc
        })
        .collect()
}

/// Nodes and weights on `[-1, 1]`.
fn gauss_legendre(q: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    for i in 0..q {
        let mut x = (PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=q {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = q as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(20);
        let i4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
        assert!((i4 - 0.4).abs() < 1e-14);
        let i0: f64 = w.iter().sum();
        assert!((i0 - 2.0).abs() < 1e-14);
    }

    #[test]
    fn width_grows_with_accuracy() {
        assert!(width_for_tol(1e-6) < width_for_tol(1e-12));
        assert_eq!(width_for_tol(1e-30), 16);
    }
}
