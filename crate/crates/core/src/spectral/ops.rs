use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::field::{Column, SpaceTimeField};
use super::grid::{FrequencyGrid, Mode};
use crate::error::{Error, Result};

/// Threshold constant of the lo/hi modulation split.
pub const MOD_THRESHOLD: f64 = 1.0 / 1024.0;

/// `(1 + x^2)^{1/2}`.
pub fn japanese_bracket(x: f64) -> f64 {
    x.hypot(1.0)
}

/// Signed distance `tau + |n|^2` from the paraboloid.
pub fn modulation(n: Mode, tau: f64) -> f64 {
    tau + n.norm_sq() as f64
}

/// Littlewood-Paley block: `N = 1` is `|n| <= 1`, otherwise `N/2 < |n| <= N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DyadicBlock(u64);

impl DyadicBlock {
    pub fn new(n: u64) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::NotDyadic(n));
        }
        Ok(DyadicBlock(n))
    }

    pub fn size(self) -> u64 {
        self.0
    }

    pub fn contains(self, mode: Mode) -> bool {
        let r2 = mode.norm_sq() as u128;
        let n = self.0 as u128;
        if n == 1 {
            r2 <= 1
        } else {
            n * n < 4 * r2 && r2 <= n * n
        }
    }

    /// Blocks `1, 2, 4, ...` up to the first one reaching the box corner.
    pub fn covering(grid: &FrequencyGrid) -> Vec<DyadicBlock> {
        let r2 = grid.dimension() as u64 * (grid.n_max() as u64).pow(2);
        let mut out = vec![DyadicBlock(1)];
        let mut n = 1u64;
        while n * n < r2 {
            n *= 2;
            out.push(DyadicBlock(n));
        }
        out
    }

    fn diameter(grid: &FrequencyGrid) -> u64 {
        2 * Self::covering(grid).last().map_or(1, |b| b.0)
    }
}

/// Zero every mode outside the block's annulus.
pub fn project_dyadic(u: &SpaceTimeField, block: DyadicBlock) -> Result<SpaceTimeField> {
    let diameter = DyadicBlock::diameter(u.grid());
    if block.0 > diameter {
        return Err(Error::BlockTooLarge {
            block: block.0,
            diameter,
        });
    }
    Ok(u.retain_modes(|m| block.contains(m)))
}

/// Side of the modulation split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lo,
    Hi,
}

/// True when `(n, tau)` lies in the lo region `|tau + |n|^2| < threshold |n|^2`.
pub fn is_lo(n: Mode, tau: f64, threshold: f64) -> bool {
    modulation(n, tau).abs() < threshold * n.norm_sq() as f64
}

/// Keep the samples on one side of the modulation split. Extents are preserved,
/// so `lo + hi` reproduces `u` exactly.
pub fn project_modulation(u: &SpaceTimeField, side: Side, threshold: f64) -> SpaceTimeField {
    let zero = Complex64::new(0.0, 0.0);
    u.map(|n, tau, z| {
        if is_lo(n, tau, threshold) == (side == Side::Lo) {
            z
        } else {
            zero
        }
    })
}

/// `conj(u^(-n, -tau))`, the Fourier data of the complex conjugate.
pub fn conjugate_reflect(u: &SpaceTimeField) -> SpaceTimeField {
    let m = u.grid().samples();
    let columns = u
        .columns()
        .map(|(&n, c)| {
            let values = c.values.iter().rev().map(|z| z.conj()).collect();
            (
                n.neg(),
                Column {
                    start: m - c.end(),
                    values,
                },
            )
        })
        .collect();
    SpaceTimeField::from_columns(*u.grid(), columns)
}

/// Result of a truncated convolution.
#[derive(Debug, Clone, PartialEq)]
pub struct Convolution {
    pub field: SpaceTimeField,
    /// `l2 L2` size of everything that fell outside the box or the tau window.
    pub dropped: f64,
}

/// Exact convolution of two piecewise-linear columns, returned on the
/// index range `[a + p - half, a + p - half + la + lb - 2]`.
fn convolve_columns(f: &Column, g: &Column, h: f64) -> Vec<Complex64> {
    let (lf, lg) = (f.len(), g.len());
    let mut out = vec![Complex64::new(0.0, 0.0); lf + lg - 1];
    if lf < 2 || lg < 2 {
        return out;
    }
    let p: Vec<Complex64> = g.values.windows(2).map(|w| w[0] + 2.0 * w[1]).collect();
    let q: Vec<Complex64> = g.values.windows(2).map(|w| 2.0 * w[0] + w[1]).collect();
    for (c, w) in f.values.windows(2).enumerate() {
        let (l, r) = (w[0], w[1]);
        for (d, (pd, qd)) in p.iter().zip(&q).enumerate() {
            out[c + d + 1] += l * pd + r * qd;
        }
    }
    let k = h / 6.0;
    for z in &mut out {
        *z *= k;
    }
    out
}

/// `(f * g)(n, tau) = sum_{n1 + n2 = n} int f(n1, t) g(n2, tau - t) dt` with each column
/// read as piecewise linear. Output outside the box or window is dropped and measured.
pub fn spacetime_convolve(f: &SpaceTimeField, g: &SpaceTimeField) -> Result<Convolution> {
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = *f.grid();
    let h = grid.tau_step();
    let half = grid.half();
    let samples = grid.samples() as i64;

    let mut pairs: BTreeMap<Mode, Vec<(&Column, &Column)>> = BTreeMap::new();
    for (n1, a) in f.columns() {
        for (n2, b) in g.columns() {
            pairs.entry(n1.add(*n2)).or_default().push((a, b));
        }
    }
    let pairs: Vec<_> = pairs.into_iter().collect();

    let results: Vec<(Mode, Option<Column>, f64)> = pairs
        .par_iter()
        .map(|(n, list)| {
            let lo = list
                .iter()
                .map(|(a, b)| a.start as i64 + b.start as i64 - half)
                .min()
                .unwrap();
            let hi = list
                .iter()
                .map(|(a, b)| a.end() as i64 + b.end() as i64 - 2 - half)
                .max()
                .unwrap();
            let mut acc = vec![Complex64::new(0.0, 0.0); (hi - lo + 1) as usize];
            for (a, b) in list {
                let off = (a.start as i64 + b.start as i64 - half - lo) as usize;
                for (i, z) in convolve_columns(a, b, h).into_iter().enumerate() {
                    acc[off + i] += z;
                }
            }
            let inside = grid.contains(*n);
            let keep_lo = if inside { lo.max(0) } else { lo };
            let keep_hi = if inside { (hi + 1).min(samples) } else { lo };
            let mut dropped = 0.0;
            for (i, z) in acc.iter().enumerate() {
                let j = lo + i as i64;
                if j < keep_lo || j >= keep_hi {
                    dropped += h * z.norm_sqr();
                }
            }
            let col = (keep_hi > keep_lo).then(|| Column {
                start: keep_lo as usize,
                values: acc[(keep_lo - lo) as usize..(keep_hi - lo) as usize].to_vec(),
            });
            (*n, col, dropped)
        })
        .collect();

    let mut columns = BTreeMap::new();
    let mut dropped = 0.0;
    for (n, col, d) in results {
        dropped += d;
        if let Some(c) = col {
            columns.insert(n, c);
        }
    }
    Ok(Convolution {
        field: SpaceTimeField::from_columns(grid, columns),
        dropped: dropped.sqrt(),
    })
}
