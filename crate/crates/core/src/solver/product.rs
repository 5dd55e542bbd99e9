use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spectral::{fast_len, fft_nd, CutoffSpec, FrequencyGrid, Mode, SpaceTimeField};

/// Largest padded array the pseudo-spectral product will allocate.
const MAX_PRODUCT_CELLS: usize = 1 << 26;

/// Cells of the padded product array for `grid`.
fn product_cells(grid: &FrequencyGrid) -> usize {
    let s = fast_len(4 * grid.n_max() as usize + 1);
    let p = fast_len(2 * grid.samples() - 1);
    s.saturating_pow(grid.dimension() as u32).saturating_mul(p)
}

/// Rejects grids whose solver arrays would exceed the allocation cap.
pub fn check_solver_grid(grid: &FrequencyGrid) -> Result<()> {
    let cells = product_cells(grid);
    if cells > MAX_PRODUCT_CELLS {
        return Err(Error::InvalidParameter(format!(
            "the solver needs {cells} cells for this grid (limit {MAX_PRODUCT_CELLS}); shrink n_max or the tau window"
        )));
    }
    Ok(())
}

struct Layout {
    d: usize,
    s: usize,
    p: usize,
    half: i64,
    shape: Vec<usize>,
}

impl Layout {
    fn slot(&self, m: Mode) -> usize {
        let s = self.s as i32;
        let a = m.0[0].rem_euclid(s) as usize;
        let sp = if self.d == 1 {
            a
        } else {
            a * self.s + m.0[1].rem_euclid(s) as usize
        };
        sp * self.p
    }

    fn tau_slot(&self, j: usize) -> usize {
        (j as i64 - self.half).rem_euclid(self.p as i64) as usize
    }

    fn len(&self) -> usize {
        self.shape.iter().product()
    }
}

fn physical(u: &SpaceTimeField, lay: &Layout, h: f64) -> Vec<Complex64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); lay.len()];
    for (&m, col) in u.columns() {
        let base = lay.slot(m);
        for (i, &z) in col.values.iter().enumerate() {
            buf[base + lay.tau_slot(col.start + i)] += z * col.weight(i, h);
        }
    }
    fft_nd(&mut buf, &lay.shape, true);
    buf
}

/// Space-time Fourier data of `eta_2T(t) conj(u) * eta_2T(t) conj(v)`, computed on a
/// zero-padded physical grid and restricted to the output modes `-(n1 + n2)` in the box.
pub fn cutoff_product(
    u: &SpaceTimeField,
    v: &SpaceTimeField,
    cutoff: &CutoffSpec,
) -> Result<SpaceTimeField> {
    if u.grid() != v.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = *u.grid();
    let su = u.support();
    let sv = v.support();
    let mut targets: Vec<Mode> = su
        .iter()
        .flat_map(|a| sv.iter().map(move |b| a.add(*b).neg()))
        .filter(|m| grid.contains(*m))
        .collect();
    targets.sort();
    targets.dedup();
    if targets.is_empty() {
        return Ok(SpaceTimeField::zeros(grid));
    }

    let d = grid.dimension();
    let m = grid.samples();
    let s = fast_len(4 * grid.n_max() as usize + 1);
    let p = fast_len(2 * m - 1);
    let mut shape = vec![s; d];
    shape.push(p);
    let lay = Layout {
        d,
        s,
        p,
        half: grid.half(),
        shape,
    };
    check_solver_grid(&grid)?;
    let h = grid.tau_step();
    let a = physical(u, &lay, h);
    let mut c = if std::ptr::eq(u, v) || u == v {
        a.clone()
    } else {
        physical(v, &lay, h)
    };
    let dt = 2.0 * PI / (p as f64 * h);
    let window: Vec<f64> = (0..p)
        .map(|l| {
            let t = if l <= p / 2 { l as f64 } else { l as f64 - p as f64 } * dt;
            cutoff.eta_2t(t).powi(2)
        })
        .collect();
    c.par_chunks_mut(p)
        .zip(a.par_chunks(p))
        .for_each(|(cr, ar)| {
            for ((z, x), w) in cr.iter_mut().zip(ar).zip(&window) {
                *z = if *w == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    z.conj() * x.conj() * w
                };
            }
        });
    fft_nd(&mut c, &lay.shape, false);
    let norm = 1.0 / ((s as f64).powi(d as i32) * p as f64 * h);
    let mut out = SpaceTimeField::zeros(grid);
    for n in targets {
        let base = lay.slot(n);
        let values: Vec<Complex64> = (0..m).map(|j| c[base + lay.tau_slot(j)] * norm).collect();
        out.insert(n, 0, values)?;
    }
    Ok(out)
}
