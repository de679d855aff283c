use crate::error::{AcsError, Result};
use crate::grid::{Field, Grid};
use crate::rng::{stream_rng, streams::PHASES};
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::PI;

/// Lacunary sum `sum_{k=k_low}^{k_high} 2^{-kr} cos(2^k x_1 + phi_k)` with
/// phases drawn from `seed`. Block `k` of the result is exactly the `k`-th term.
pub fn gen_lacunary(grid: &Grid, r: f64, k_low: u32, k_high: u32, seed: u64) -> Result<Field> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(AcsError::InvalidParameter(format!(
            "lacunary exponent must be positive, got {r}"
        )));
    }
    if k_low > k_high {
        return Err(AcsError::InvalidParameter(format!(
            "empty frequency range {k_low}..={k_high}"
        )));
    }
    let top = grid.k_max() as u32;
    if k_high > top {
        return Err(AcsError::InvalidParameter(format!(
            "k_high = {k_high} exceeds log2(N/2) = {top} for this grid"
        )));
    }
    let mut rng = stream_rng(seed, PHASES);
    let terms: Vec<(f64, f64, f64)> = (k_low..=k_high)
        .map(|k| {
            let phase = rng.gen_range(0.0..2.0 * PI);
            (2f64.powi(k as i32), 2f64.powf(-(k as f64) * r), phase)
        })
        .collect();
    let w = grid.wavenumber();
    Ok(Field::from_fn(*grid, 1, |_, x| {
        let v = terms
            .iter()
            .map(|&(f, amp, phase)| amp * (f * w * x[0] + phase).cos())
            .sum::<f64>();
        Complex64::new(v, 0.0)
    }))
}
