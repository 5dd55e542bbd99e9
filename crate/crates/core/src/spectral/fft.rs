use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

/// Smallest `n' >= n` of the form `2^a 3^b 5^c`.
pub fn fast_len(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Unnormalized transform of a row-major array along every axis.
/// `inverse` selects the `e^{+i}` kernel.
pub fn fft_nd(data: &mut [Complex64], shape: &[usize], inverse: bool) {
    let total: usize = shape.iter().product();
    assert_eq!(total, data.len(), "shape does not match data");
    if total == 0 {
        return;
    }
    let mut planner = FftPlanner::new();
    let plan = |p: &mut FftPlanner<f64>, n: usize| -> Arc<dyn Fft<f64>> {
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    };
    for (axis, &n) in shape.iter().enumerate() {
        if n <= 1 {
            continue;
        }
        let fft = plan(&mut planner, n);
        let inner: usize = shape[axis + 1..].iter().product();
        if inner == 1 {
            data.par_chunks_mut(n).for_each(|row| fft.process(row));
            continue;
        }
        let block = n * inner;
        data.par_chunks_mut(block).for_each(|blk| {
            let mut line = vec![Complex64::new(0.0, 0.0); n];
            let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
            for i in 0..inner {
                for (k, z) in line.iter_mut().enumerate() {
                    *z = blk[k * inner + i];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (k, z) in line.iter().enumerate() {
                    blk[k * inner + i] = *z;
                }
            }
        });
    }
}

/// One-dimensional unnormalized transform.
pub fn fft_1d(data: &mut [Complex64], inverse: bool) {
    let n = data.len();
    fft_nd(data, &[n], inverse);
}
