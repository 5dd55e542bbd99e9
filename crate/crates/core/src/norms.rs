//! Restriction norms of space-time Fourier data.
//!
//! Every tau integral uses the trapezoid rule on the stored run of each column.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{
    column_on_lattice, column_value, fast_len, fft_nd, is_lo, modulation, project_dyadic, Column,
    DyadicBlock, Mode, SpaceTimeField, MOD_THRESHOLD,
};

/// Regularity `s`, modulation exponent `b` and the lo/hi split constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormParams {
    pub s: f64,
    pub b: f64,
    pub mod_threshold: f64,
}

impl Default for NormParams {
    fn default() -> Self {
        NormParams {
            s: -0.6,
            b: 2.0 / 3.0,
            mod_threshold: MOD_THRESHOLD,
        }
    }
}

impl NormParams {
    pub fn new(s: f64, b: f64) -> Result<Self> {
        Self::with_threshold(s, b, MOD_THRESHOLD)
    }

    pub fn with_threshold(s: f64, b: f64, mod_threshold: f64) -> Result<Self> {
        if !s.is_finite() || !b.is_finite() {
            return Err(Error::InvalidParameter(format!("s = {s}, b = {b} must be finite")));
        }
        if !(mod_threshold.is_finite() && mod_threshold > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "mod_threshold must be positive, got {mod_threshold}"
            )));
        }
        Ok(NormParams { s, b, mod_threshold })
    }
}

fn bracket_sq(x: f64) -> f64 {
    1.0 + x * x
}

/// Sum a per-column quantity in mode order, evaluating columns in parallel.
fn column_sum<T, F>(u: &SpaceTimeField, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Mode, &Column) -> T + Sync,
{
    let cols: Vec<(&Mode, &Column)> = u.columns().collect();
    if cols.len() < 64 {
        cols.iter().map(|(m, c)| f(**m, c)).collect()
    } else {
        cols.par_iter().map(|(m, c)| f(**m, c)).collect()
    }
}

/// Per-column pieces of the X, Y and Z norms.
#[derive(Debug, Clone, Copy, Default)]
struct Parts {
    x_all: f64,
    x_lo: f64,
    l1_all: f64,
    l1_hi: f64,
    y2_all: f64,
    y2_hi: f64,
}

fn parts(u: &SpaceTimeField, p: &NormParams) -> Vec<Parts> {
    let g = *u.grid();
    let h = g.tau_step();
    column_sum(u, |n, c| {
        let ws = (1.0 + n.norm_sq() as f64).powf(p.s);
        let mut q = Parts::default();
        for (i, z) in c.values.iter().enumerate() {
            let w = c.weight(i, h);
            if w == 0.0 {
                continue;
            }
            let tau = g.tau(c.start + i);
            let sig = bracket_sq(modulation(n, tau));
            let a2 = z.norm_sqr();
            let x = w * ws * sig.powf(p.b) * a2;
            let l1 = w * z.norm();
            let y2 = w * sig.powf(p.s / 2.0 + p.b) * a2;
            q.x_all += x;
            q.l1_all += l1;
            q.y2_all += y2;
            if is_lo(n, tau, p.mod_threshold) {
                q.x_lo += x;
            } else {
                q.l1_hi += l1;
                q.y2_hi += y2;
            }
        }
        q.l1_all = ws * q.l1_all * q.l1_all;
        q.l1_hi = ws * q.l1_hi * q.l1_hi;
        q
    })
}

fn totals(ps: &[Parts]) -> Parts {
    ps.iter().fold(Parts::default(), |a, q| Parts {
        x_all: a.x_all + q.x_all,
        x_lo: a.x_lo + q.x_lo,
        l1_all: a.l1_all + q.l1_all,
        l1_hi: a.l1_hi + q.l1_hi,
        y2_all: a.y2_all + q.y2_all,
        y2_hi: a.y2_hi + q.y2_hi,
    })
}

/// `|| <n>^s <tau + |n|^2>^b u^ ||_{l2 L2}`.
pub fn xsb_norm(u: &SpaceTimeField, p: &NormParams) -> f64 {
    totals(&parts(u, p)).x_all.sqrt()
}

/// `|| <n>^s u^ ||_{l2 L1} + || <tau + |n|^2>^{s/2 + b} u^ ||_{l2 L2}`.
pub fn ysb_norm(u: &SpaceTimeField, p: &NormParams) -> f64 {
    let t = totals(&parts(u, p));
    t.l1_all.sqrt() + t.y2_all.sqrt()
}

/// The two terms of [`ysb_norm`] separately.
pub fn ysb_terms(u: &SpaceTimeField, p: &NormParams) -> (f64, f64) {
    let t = totals(&parts(u, p));
    (t.l1_all.sqrt(), t.y2_all.sqrt())
}

/// X norm of the lo-modulation part plus Y norm of the hi part.
pub fn zsb_norm(u: &SpaceTimeField, p: &NormParams) -> f64 {
    let t = totals(&parts(u, p));
    t.x_lo.sqrt() + t.l1_hi.sqrt() + t.y2_hi.sqrt()
}

/// `|| <n>^s u^ ||_{l2 L1}`.
pub fn energy_l2l1(u: &SpaceTimeField, s: f64) -> f64 {
    let p = NormParams {
        s,
        ..NormParams::default()
    };
    totals(&parts(u, &p)).l1_all.sqrt()
}

fn check_window(t0: f64, t1: f64, h: f64) -> Result<()> {
    if !(t0.is_finite() && t1.is_finite()) || t0 > t1 {
        return Err(Error::EmptyWindow);
    }
    if t0.abs().max(t1.abs()) > PI / h {
        return Err(Error::WindowTooLong(t0, t1));
    }
    Ok(())
}

/// `sup_t || u(t) ||_{H^s}` over the window, sampled at 8 points per reciprocal column
/// extent plus both endpoints.
pub fn ct_hs_norm(u: &SpaceTimeField, s: f64, window: (f64, f64)) -> Result<f64> {
    let g = *u.grid();
    let h = g.tau_step();
    let (t0, t1) = window;
    check_window(t0, t1, h)?;
    let maxlen = u.columns().map(|(_, c)| c.len()).max().unwrap_or(0);
    if maxlen == 0 {
        return Ok(0.0);
    }
    let p = fast_len(8 * maxlen.max(2));
    let dt = 2.0 * PI / (p as f64 * h);
    let l0 = (t0 / dt).ceil() as i64;
    let l1 = (t1 / dt).floor() as i64;
    let nt = (l1 - l0 + 1).max(0) as usize + 2;
    let per_col = column_sum(u, |n, c| {
        let w = (1.0 + n.norm_sq() as f64).powf(s);
        let mut v = Vec::with_capacity(nt);
        v.push(w * column_value(c, &g, t0).norm_sqr());
        v.push(w * column_value(c, &g, t1).norm_sqr());
        if l1 >= l0 {
            v.extend(
                column_on_lattice(c, &g, p, l0..=l1, false)
                    .iter()
                    .map(|z| w * z.norm_sqr()),
            );
        }
        v
    });
    let mut acc = vec![0.0; nt];
    for v in &per_col {
        for (a, x) in acc.iter_mut().zip(v) {
            *a += x;
        }
    }
    Ok(acc.into_iter().fold(0.0, f64::max).sqrt())
}

/// Physical `L^4(T^d x [t0, t1])` norm.
///
/// Space is sampled on an FFT grid at least twice the Nyquist size of the support, time at a
/// step resolving the full tau bandwidth of `|u|^4`, with exact window endpoints.
pub fn l4_spacetime_norm(u: &SpaceTimeField, window: (f64, f64)) -> Result<f64> {
    let g = *u.grid();
    let h = g.tau_step();
    let (t0, t1) = window;
    check_window(t0, t1, h)?;
    let support = u.support();
    if support.is_empty() || t1 == t0 {
        return Ok(0.0);
    }
    let d = g.dimension();
    let maxabs = support
        .iter()
        .map(|m| m.0[0].abs().max(m.0[1].abs()))
        .max()
        .unwrap() as usize;
    let s = fast_len(2 * (2 * maxabs + 1));
    let jmin = u.columns().map(|(_, c)| c.start).min().unwrap();
    let jmax = u.columns().map(|(_, c)| c.end()).max().unwrap();
    let extent = (jmax - jmin) as f64 * h;
    let p = fast_len((4.0 * extent / h).ceil() as usize + 1);
    let dt = 2.0 * PI / (p as f64 * h);
    let l0 = (t0 / dt).ceil() as i64;
    let l1 = (t1 / dt).floor() as i64;

    let mut times = vec![t0];
    times.extend((l0..=l1).map(|l| l as f64 * dt).filter(|&t| t > t0 && t < t1));
    times.push(t1);
    let inner = l0..=l1;
    let skip = |l: i64| {
        let t = l as f64 * dt;
        !(t > t0 && t < t1)
    };

    let cols: Vec<(Mode, &Column)> = u.columns().map(|(m, c)| (*m, c)).collect();
    let values: Vec<Vec<Complex64>> = cols
        .par_iter()
        .map(|(_, c)| {
            let mut v = vec![column_value(c, &g, t0)];
            if l1 >= l0 {
                let lat = column_on_lattice(c, &g, p, inner.clone(), true);
                v.extend(
                    inner
                        .clone()
                        .zip(lat)
                        .filter(|(l, _)| !skip(*l))
                        .map(|(_, z)| z),
                );
            }
            v.push(column_value(c, &g, t1));
            v
        })
        .collect();

    let shape: Vec<usize> = vec![s; d];
    let cell = (2.0 * PI / s as f64).powi(d as i32);
    let slot = |m: Mode| -> usize {
        let a = m.0[0].rem_euclid(s as i32) as usize;
        if d == 1 {
            a
        } else {
            a * s + m.0[1].rem_euclid(s as i32) as usize
        }
    };
    let slab: Vec<f64> = (0..times.len())
        .into_par_iter()
        .map(|k| {
            let mut buf = vec![Complex64::new(0.0, 0.0); s.pow(d as u32)];
            for ((m, _), v) in cols.iter().zip(&values) {
                buf[slot(*m)] += v[k];
            }
            fft_nd(&mut buf, &shape, true);
            buf.iter().map(|z| z.norm_sqr() * z.norm_sqr()).sum::<f64>() * cell
        })
        .collect();
    let mut total = 0.0;
    for k in 1..times.len() {
        total += 0.5 * (times[k] - times[k - 1]) * (slab[k] + slab[k - 1]);
    }
    Ok(total.powf(0.25))
}

/// `(N, zsb_norm(P_N u))` for every dyadic block covering the grid.
pub fn dyadic_norm_profile(u: &SpaceTimeField, p: &NormParams) -> Vec<(u64, f64)> {
    DyadicBlock::covering(u.grid())
        .into_iter()
        .map(|b| {
            let part = project_dyadic(u, b).expect("covering blocks fit the grid");
            (b.size(), zsb_norm(&part, p))
        })
        .collect()
}
