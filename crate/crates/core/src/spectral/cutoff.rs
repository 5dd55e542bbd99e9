use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fft::{fast_len, fft_1d};
use super::field::{SpaceTimeField, SpatialField};
use super::grid::FrequencyGrid;
use crate::error::{Error, Result};

fn smooth_edge(y: f64) -> f64 {
    if y <= 0.0 {
        0.0
    } else {
        (-1.0 / y).exp()
    }
}

/// Even `C^infinity` bump: 1 on `[-1, 1]`, 0 outside `(-2, 2)`, monotone in between.
pub fn bump(x: f64) -> f64 {
    let a = x.abs();
    if a <= 1.0 {
        1.0
    } else if a >= 2.0 {
        0.0
    } else {
        let up = smooth_edge(2.0 - a);
        up / (up + smooth_edge(a - 1.0))
    }
}

/// Default modulation cut for free-evolution columns; `|eta^|` is below `1e-11` beyond it.
pub const DEFAULT_PROFILE_CUT: f64 = 256.0;

/// Time cutoffs `eta`, `psi` (both [`bump`]) and the localization time `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    t: f64,
    profile_cut: f64,
}

impl CutoffSpec {
    pub fn new(t: f64) -> Result<Self> {
        if !(t > 0.0 && t <= 0.25) {
            return Err(Error::InvalidParameter(format!("T must lie in (0, 1/4], got {t}")));
        }
        Ok(CutoffSpec {
            t,
            profile_cut: DEFAULT_PROFILE_CUT,
        })
    }

    /// Keep free-evolution samples with `|tau + |n|^2| <= cut`; `f64::INFINITY` keeps the whole window.
    pub fn with_profile_cut(mut self, cut: f64) -> Result<Self> {
        if !(cut >= 4.0) {
            return Err(Error::InvalidParameter(format!("profile cut must be >= 4, got {cut}")));
        }
        self.profile_cut = cut;
        Ok(self)
    }

    pub fn t(&self) -> f64 {
        self.t
    }
    pub fn profile_cut(&self) -> f64 {
        self.profile_cut
    }
    pub fn eta(&self, t: f64) -> f64 {
        bump(t)
    }
    /// `eta(t / 2T)`.
    pub fn eta_2t(&self, t: f64) -> f64 {
        bump(t / (2.0 * self.t))
    }
    pub fn psi(&self, sigma: f64) -> f64 {
        bump(sigma)
    }
}

/// Samples `theta_k(m h) = (1/2pi) int t^k eta(t) e^{-i t m h} dt` for `|m| <= range`.
#[derive(Debug)]
pub struct ProfileTable {
    h: f64,
    range: usize,
    rows: Vec<Vec<Complex64>>,
    peaks: Vec<f64>,
}

impl ProfileTable {
    /// Requires `h <= 1` so the time period `2 pi / h` exceeds the bump support.
    pub fn build(h: f64, range: usize, kmax: usize) -> Result<Self> {
        if !(h > 0.0 && h <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "profile tables need 0 < tau_step <= 1, got {h}"
            )));
        }
        let min_q = (2.0 * PI / (h * 1e-3)).ceil() as usize;
        let q = fast_len((2 * range + 1).max(min_q));
        let dt = 2.0 * PI / (q as f64 * h);
        let times: Vec<f64> = (0..q)
            .map(|l| {
                let s = if l <= q / 2 { l as i64 } else { l as i64 - q as i64 };
                s as f64 * dt
            })
            .collect();
        let mut rows = Vec::with_capacity(kmax + 1);
        let mut peaks = Vec::with_capacity(kmax + 1);
        for k in 0..=kmax {
            let mut buf: Vec<Complex64> = times
                .iter()
                .map(|&t| Complex64::new(t.powi(k as i32) * bump(t), 0.0))
                .collect();
            fft_1d(&mut buf, false);
            let scale = dt / (2.0 * PI);
            let row: Vec<Complex64> = (0..=2 * range)
                .map(|i| {
                    let m = i as i64 - range as i64;
                    buf[m.rem_euclid(q as i64) as usize] * scale
                })
                .collect();
            peaks.push(row.iter().fold(0.0f64, |a, z| a.max(z.norm())));
            rows.push(row);
        }
        Ok(ProfileTable {
            h,
            range,
            rows,
            peaks,
        })
    }

    /// Shared table with at least the requested range and order.
    pub fn cached(h: f64, range: usize, kmax: usize) -> Result<Arc<ProfileTable>> {
        static CACHE: OnceLock<Mutex<HashMap<u64, Arc<ProfileTable>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let key = h.to_bits();
        let (mut range, mut kmax) = (range, kmax);
        if let Some(t) = cache.lock().unwrap().get(&key) {
            if t.range >= range && t.rows.len() > kmax {
                return Ok(t.clone());
            }
            range = range.max(t.range);
            kmax = kmax.max(t.max_order());
        }
        let table = Arc::new(Self::build(h, range, kmax)?);
        cache.lock().unwrap().insert(key, table.clone());
        Ok(table)
    }

    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn range(&self) -> usize {
        self.range
    }
    pub fn max_order(&self) -> usize {
        self.rows.len() - 1
    }
    /// `max_m |theta_k(m h)|`.
    pub fn peak(&self, k: usize) -> f64 {
        self.peaks[k]
    }

    /// `theta_k(m h)`, zero outside the tabulated range.
    pub fn get(&self, k: usize, m: i64) -> Complex64 {
        let i = m + self.range as i64;
        if i < 0 || i > 2 * self.range as i64 {
            Complex64::new(0.0, 0.0)
        } else {
            self.rows[k][i as usize]
        }
    }

    /// `eta^(m h)`.
    pub fn eta_hat(&self, m: i64) -> Complex64 {
        self.get(0, m)
    }
}

/// Lattice offset of `|n|^2` in units of `h`, requiring `1/h` to be an integer.
pub(crate) fn unit_steps(grid: &FrequencyGrid) -> Result<i64> {
    if !grid.unit_aligned() {
        return Err(Error::InvalidGrid(format!(
            "1 / tau_step must be an integer, tau_step = {}",
            grid.tau_step()
        )));
    }
    Ok((1.0 / grid.tau_step()).round() as i64)
}

/// Space-time data of `eta(t) e^{it Laplacian} phi`: `eta^(tau + |n|^2) phi^(n)`,
/// kept where `|tau + |n|^2| <= cutoff.profile_cut()`.
pub fn free_evolution_data(
    phi: &SpatialField,
    cutoff: &CutoffSpec,
    grid: &FrequencyGrid,
) -> Result<SpaceTimeField> {
    if phi.dimension() != grid.dimension() || phi.n_max() != grid.n_max() {
        return Err(Error::ShapeMismatch(format!(
            "spatial data is d={} n_max={}, grid is d={} n_max={}",
            phi.dimension(),
            phi.n_max(),
            grid.dimension(),
            grid.n_max()
        )));
    }
    let per_unit = unit_steps(grid)?;
    let h = grid.tau_step();
    let half = grid.half();
    let widest = grid.dimension() as i64 * (grid.n_max() as i64).pow(2) * per_unit + half;
    let cut_steps = (cutoff.profile_cut() / h).floor().min(widest as f64) as i64;
    let table = ProfileTable::cached(h, cut_steps as usize, 0)?;
    let last = grid.samples() as i64 - 1;
    let mut out = SpaceTimeField::zeros(*grid);
    for (n, z) in phi.iter() {
        if z.re == 0.0 && z.im == 0.0 {
            continue;
        }
        let shift = n.norm_sq() * per_unit;
        let lo = (half - shift - cut_steps).max(0);
        let hi = (half - shift + cut_steps).min(last);
        if hi < lo {
            continue;
        }
        let values = (lo..=hi)
            .map(|j| table.eta_hat(j - half + shift) * z)
            .collect();
        out.insert(n, lo as usize, values)?;
    }
    Ok(out)
}
