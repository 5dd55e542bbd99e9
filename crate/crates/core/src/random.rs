//! Seeded random data for experiments and property checks.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::spectral::{FrequencyGrid, Mode, SpaceTimeField, SpatialField};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Complex Gaussian with `E|g|^2 = 1`.
pub fn complex_gaussian<R: Rng>(r: &mut R) -> Complex64 {
    let a: f64 = r.sample(StandardNormal);
    let b: f64 = r.sample(StandardNormal);
    Complex64::new(a, b) * std::f64::consts::FRAC_1_SQRT_2
}

/// `<n>^{-s-1} g_n`, rescaled to unit `H^s` norm.
pub fn rough_data(dimension: usize, n_max: i32, s: f64, seed: u64) -> SpatialField {
    let mut r = rng(seed);
    let mut phi = SpatialField::zeros(dimension, n_max);
    let modes: Vec<Mode> = phi.modes().collect();
    for m in modes {
        let w = (1.0 + m.norm_sq() as f64).powf(-(s + 1.0) / 2.0);
        phi.set(m, complex_gaussian(&mut r) * w).unwrap();
    }
    let norm = phi.hs_norm(s);
    phi.scale(1.0 / norm)
}

/// Gaussian-decaying coefficients `e^{-|n|^2 / (2 width^2)} g_n` with `L^2` norm `amplitude`.
pub fn smooth_data(dimension: usize, n_max: i32, width: f64, amplitude: f64, seed: u64) -> SpatialField {
    let mut r = rng(seed);
    let mut phi = SpatialField::zeros(dimension, n_max);
    let modes: Vec<Mode> = phi.modes().collect();
    for m in modes {
        let w = (-(m.norm_sq() as f64) / (2.0 * width * width)).exp();
        phi.set(m, complex_gaussian(&mut r) * w).unwrap();
    }
    let norm = phi.hs_norm(0.0);
    phi.scale(amplitude / norm)
}

/// A field with `columns` random modes, each carrying a random run of at most `max_len`
/// complex Gaussian samples placed anywhere in the window.
pub fn random_field<R: Rng>(grid: &FrequencyGrid, r: &mut R, columns: usize, max_len: usize) -> SpaceTimeField {
    let mut u = SpaceTimeField::zeros(*grid);
    let m = grid.n_max();
    let samples = grid.samples();
    for _ in 0..columns {
        let a = r.random_range(-m..=m);
        let b = if grid.dimension() == 2 { r.random_range(-m..=m) } else { 0 };
        let len = r.random_range(2..=max_len.clamp(2, samples));
        let start = r.random_range(0..=samples - len);
        let values = (0..len).map(|_| complex_gaussian(r)).collect();
        u.insert(Mode::new(a, b), start, values).unwrap();
    }
    u
}

/// Like [`random_field`] but with runs centred near the paraboloid `tau = -|n|^2`,
/// so both modulation regions are populated.
pub fn random_near_paraboloid<R: Rng>(
    grid: &FrequencyGrid,
    r: &mut R,
    columns: usize,
    spread: f64,
) -> SpaceTimeField {
    let mut u = SpaceTimeField::zeros(*grid);
    let m = grid.n_max();
    let h = grid.tau_step();
    for _ in 0..columns {
        let a = r.random_range(-m..=m);
        let b = if grid.dimension() == 2 { r.random_range(-m..=m) } else { 0 };
        let n = Mode::new(a, b);
        let center = -(n.norm_sq() as f64) + r.random_range(-spread..=spread);
        let half = r.random_range(1.0..=spread.max(1.0));
        let lo = ((center - half) / h).floor() * h;
        let vals: Vec<Complex64> = (0..=((2.0 * half / h).ceil() as usize))
            .map(|_| complex_gaussian(r))
            .collect();
        let start = grid.nearest_index(lo);
        let len = vals.len().min(grid.samples() - start).max(1);
        u.insert(n, start, vals[..len].to_vec()).unwrap();
    }
    u
}
