//! Multi-dimensional complex FFT over cubic grids, axis by axis.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

type PlanPair = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

fn plans(size: usize) -> PlanPair {
    static CACHE: OnceLock<Mutex<HashMap<usize, PlanPair>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(size)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (
                planner.plan_fft_forward(size),
                planner.plan_fft_inverse(size),
            )
        })
        .clone()
}

/// In-place transform of an `size^dim` array (last axis fastest).
/// The forward transform is unnormalised; the inverse divides by `size^dim`.
pub(crate) fn fft_nd(data: &mut [Complex64], size: usize, dim: usize, inverse: bool) {
    debug_assert_eq!(data.len(), size.pow(dim as u32));
    let (fwd, inv) = plans(size);
    let plan = if inverse { inv } else { fwd };
    let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];

    // transform the contiguous last axis, then rotate the axes so the next
    // one becomes last; after `dim` rounds the original order is restored
    let rows = data.len() / size;
    if dim == 1 {
        plan.process_with_scratch(data, &mut scratch);
    } else {
        thread_local! {
            static BUF: std::cell::RefCell<Vec<Complex64>> = const { std::cell::RefCell::new(Vec::new()) };
        }
        BUF.with_borrow_mut(|buf| {
            buf.resize(data.len(), Complex64::new(0.0, 0.0));
            for round in 0..dim {
                // alternate between `data` and `buf` to avoid copies
                let (src, dst) = if round % 2 == 0 {
                    (&mut *data, &mut buf[..])
                } else {
                    (&mut buf[..], &mut *data)
                };
                plan.process_with_scratch(src, &mut scratch);
                transpose(src, dst, rows, size);
            }
            if dim % 2 == 1 {
                data.copy_from_slice(buf);
            }
        });
    }

    if inverse {
        let s = 1.0 / data.len() as f64;
        data.iter_mut().for_each(|v| *v *= s);
    }
}

/// Blocked transpose of a row-major `rows x cols` matrix into `dst`.
fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    const TILE: usize = 8;
    for r0 in (0..rows).step_by(TILE) {
        for c0 in (0..cols).step_by(TILE) {
            for r in r0..(r0 + TILE).min(rows) {
                for c in c0..(c0 + TILE).min(cols) {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}

/// One-dimensional transform of a single line, same normalisation convention.
pub(crate) fn fft_1d(data: &mut [Complex64], inverse: bool) {
    fft_nd(data, data.len(), 1, inverse)
}
