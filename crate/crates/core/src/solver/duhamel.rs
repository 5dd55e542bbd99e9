use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use super::product::cutoff_product;
use crate::error::Result;
use crate::spectral::{unit_steps, CutoffSpec, Mode, ProfileTable, SpaceTimeField};

/// Highest Taylor order tabulated for the first Duhamel term.
pub const MAX_TAYLOR_ORDER: usize = 60;

/// The three pieces of the cut-off Duhamel integral of one product.
#[derive(Debug, Clone, PartialEq)]
pub struct DuhamelParts {
    pub n1: SpaceTimeField,
    pub n2: SpaceTimeField,
    pub n3: SpaceTimeField,
    /// Taylor terms kept in the first piece.
    pub taylor_terms: usize,
}

impl DuhamelParts {
    pub fn sum(&self) -> Result<SpaceTimeField> {
        self.n1.add(&self.n2)?.add(&self.n3)
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Order after which `2^{k-1} max|theta_k| / k!` has dropped below `1e-16` of its peak.
fn taylor_order(table: &ProfileTable) -> usize {
    let mut best = 0.0f64;
    for k in 1..=table.max_order() {
        let b = 2f64.powi(k as i32 - 1) * table.peak(k) / factorial(k);
        best = best.max(b);
        if k >= 2 && b < 1e-16 * best {
            return k;
        }
    }
    table.max_order()
}

/// Apply the three Duhamel multipliers to product data `F`.
pub fn duhamel_from_product(f: &SpaceTimeField, cutoff: &CutoffSpec) -> Result<DuhamelParts> {
    let grid = *f.grid();
    let per_unit = unit_steps(&grid)?;
    let h = grid.tau_step();
    let half = grid.half();
    let widest = grid.dimension() as i64 * (grid.n_max() as i64).pow(2) * per_unit + half;
    let table: Arc<ProfileTable> = ProfileTable::cached(h, widest as usize, MAX_TAYLOR_ORDER)?;
    let kmax = taylor_order(&table);
    let m = grid.samples();
    let i = Complex64::new(0.0, 1.0);
    let zero = Complex64::new(0.0, 0.0);

    let cols: Vec<(Mode, &crate::spectral::Column)> = f.columns().map(|(n, c)| (*n, c)).collect();
    let pieces: Vec<(Mode, [Vec<Complex64>; 3])> = cols
        .par_iter()
        .map(|&(n, col)| {
            let shift = n.norm_sq() * per_unit;
            let sigma = |j: usize| grid.tau(j) + n.norm_sq() as f64;
            let lattice = |j: usize| j as i64 - half + shift;
            let mut a = vec![zero; kmax + 1];
            let mut c2 = zero;
            let mut n3 = vec![zero; m];
            for (k, &z) in col.values.iter().enumerate() {
                let j = col.start + k;
                let w = col.weight(k, h);
                let sg = sigma(j);
                let psi = cutoff.psi(sg);
                if psi > 0.0 {
                    let mut pw = w * psi;
                    for ak in a.iter_mut().skip(1) {
                        *ak += z * pw;
                        pw *= sg;
                    }
                }
                if psi < 1.0 {
                    let q = z * (1.0 - psi) / sg;
                    c2 += w * q / i;
                    n3[j] = -q;
                }
            }
            let coeffs: Vec<Complex64> = (1..=kmax)
                .map(|k| -i * i.powi(k as i32 - 1) / factorial(k) * a[k])
                .collect();
            let n1: Vec<Complex64> = (0..m)
                .map(|j| {
                    let mj = lattice(j);
                    coeffs
                        .iter()
                        .enumerate()
                        .map(|(k, c)| c * table.get(k + 1, mj))
                        .sum()
                })
                .collect();
            let n2: Vec<Complex64> = (0..m).map(|j| i * c2 * table.eta_hat(lattice(j))).collect();
            (n, [n1, n2, n3])
        })
        .collect();

    let mut out = [
        SpaceTimeField::zeros(grid),
        SpaceTimeField::zeros(grid),
        SpaceTimeField::zeros(grid),
    ];
    for (n, vals) in pieces {
        for (field, v) in out.iter_mut().zip(vals) {
            field.insert(n, 0, v)?;
        }
    }
    let [n1, n2, n3] = out;
    Ok(DuhamelParts {
        n1,
        n2,
        n3,
        taylor_terms: kmax,
    })
}

/// All three Duhamel pieces for the product `eta_2T conj(u) eta_2T conj(v)`.
pub fn duhamel_terms(
    u: &SpaceTimeField,
    v: &SpaceTimeField,
    cutoff: &CutoffSpec,
) -> Result<DuhamelParts> {
    let f = cutoff_product(u, v, cutoff)?;
    duhamel_from_product(&f, cutoff)
}

/// Smooth-in-modulation piece: `psi(sigma)` part of the symbol, expanded in `t^k eta(t)`.
pub fn duhamel_n1(u: &SpaceTimeField, v: &SpaceTimeField, c: &CutoffSpec) -> Result<SpaceTimeField> {
    Ok(duhamel_terms(u, v, c)?.n1)
}

/// Boundary piece: the `tau`-integral of `(1 - psi) F / (i sigma)` carried by the free evolution.
pub fn duhamel_n2(u: &SpaceTimeField, v: &SpaceTimeField, c: &CutoffSpec) -> Result<SpaceTimeField> {
    Ok(duhamel_terms(u, v, c)?.n2)
}

/// Stationary piece: `-(1 - psi(sigma)) F / sigma`.
pub fn duhamel_n3(u: &SpaceTimeField, v: &SpaceTimeField, c: &CutoffSpec) -> Result<SpaceTimeField> {
    Ok(duhamel_terms(u, v, c)?.n3)
}
