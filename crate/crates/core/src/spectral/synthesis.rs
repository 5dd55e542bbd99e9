use num_complex::Complex64;

use super::fft::fft_1d;
use super::field::{Column, SpaceTimeField, SpatialField};
use super::grid::FrequencyGrid;

/// `u(n, t) = sum_j w_j u^(n, tau_j) e^{i t tau_j}` for one column, by direct summation.
pub fn column_value(col: &Column, grid: &FrequencyGrid, t: f64) -> Complex64 {
    let h = grid.tau_step();
    let step = Complex64::from_polar(1.0, t * h);
    let mut ph = Complex64::from_polar(1.0, t * grid.tau(col.start));
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, &z) in col.values.iter().enumerate() {
        acc += z * ph * col.weight(i, h);
        ph *= step;
    }
    acc
}

/// Spatial Fourier coefficients of `u(., t)`.
pub fn spatial_at(u: &SpaceTimeField, t: f64) -> SpatialField {
    let g = u.grid();
    let mut out = SpatialField::zeros(g.dimension(), g.n_max());
    for (&n, col) in u.columns() {
        out.set(n, column_value(col, g, t))
            .expect("field modes lie in the box");
    }
    out
}

/// Values `u(n, l dt)` with `dt = 2 pi / (p h)` for `l` in `ls`, by one length-`p` transform.
/// When `with_phase` is false the factor `e^{i t tau_start}` is omitted, which leaves the modulus unchanged.
pub fn column_on_lattice(
    col: &Column,
    grid: &FrequencyGrid,
    p: usize,
    ls: std::ops::RangeInclusive<i64>,
    with_phase: bool,
) -> Vec<Complex64> {
    let h = grid.tau_step();
    let mut buf = vec![Complex64::new(0.0, 0.0); p];
    for (i, &z) in col.values.iter().enumerate() {
        buf[i % p] += z * col.weight(i, h);
    }
    fft_1d(&mut buf, true);
    let dt = 2.0 * std::f64::consts::PI / (p as f64 * h);
    let t0 = grid.tau(col.start);
    ls.map(|l| {
        let z = buf[l.rem_euclid(p as i64) as usize];
        if with_phase {
            z * Complex64::from_polar(1.0, l as f64 * dt * t0)
        } else {
            z
        }
    })
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Mode;

    #[test]
    fn lattice_matches_direct() {
        let g = FrequencyGrid::new(1, 3, 0.25).unwrap();
        let mut u = SpaceTimeField::zeros(g);
        u.insert_fn(Mode::new(2, 0), -6.0, -2.5, |t| Complex64::new(t.sin(), t.cos() * 0.5))
            .unwrap();
        let col = u.column(Mode::new(2, 0)).unwrap();
        let p = 12;
        let vals = column_on_lattice(col, &g, p, -7..=7, true);
        let dt = 2.0 * std::f64::consts::PI / (p as f64 * 0.25);
        for (k, l) in (-7..=7).enumerate() {
            let d = column_value(col, &g, l as f64 * dt);
            assert!((vals[k] - d).norm() < 1e-12);
        }
    }

    #[test]
    fn hat_is_a_pure_mode() {
        let g = FrequencyGrid::new(1, 3, 0.5).unwrap();
        let mut u = SpaceTimeField::zeros(g);
        let j = g.index_of(-4.0).unwrap();
        let z = Complex64::new(0.0, 0.0);
        u.insert(Mode::new(2, 0), j - 1, vec![z, Complex64::new(2.0, 0.0), z])
            .unwrap();
        for t in [0.0, 0.3, -1.1] {
            let v = spatial_at(&u, t).get(Mode::new(2, 0));
            assert!((v - Complex64::from_polar(1.0, -4.0 * t)).norm() < 1e-14);
        }
    }
}
