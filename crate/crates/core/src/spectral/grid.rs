use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of tau samples a grid may carry. Fields are stored as
/// sparse columns, so this bounds index arithmetic rather than memory.
pub const MAX_TAU_SAMPLES: u64 = 1 << 40;

/// Truncated spatial lattice `{-n_max..=n_max}^d` times a symmetric uniform tau grid.
///
/// Sample `j` sits at `tau = (j - half) * tau_step`, so `tau = 0` is always a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct FrequencyGrid {
    dimension: usize,
    n_max: i32,
    tau_step: f64,
    half: i64,
}

/// Plain serialized form of a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dimension: usize,
    pub n_max: i32,
    pub tau_min: f64,
    pub tau_max: f64,
    pub tau_step: f64,
}

impl TryFrom<GridSpec> for FrequencyGrid {
    type Error = Error;
    fn try_from(g: GridSpec) -> Result<Self> {
        FrequencyGrid::with_window(g.dimension, g.n_max, g.tau_min, g.tau_max, g.tau_step)
    }
}

impl From<FrequencyGrid> for GridSpec {
    fn from(g: FrequencyGrid) -> Self {
        GridSpec {
            dimension: g.dimension,
            n_max: g.n_max,
            tau_min: g.tau_min(),
            tau_max: g.tau_max(),
            tau_step: g.tau_step,
        }
    }
}

/// Minimal half-width every window must cover.
pub fn required_half_width(n_max: i32) -> f64 {
    let n = n_max as f64;
    2.0 * n * n + 4.0
}

impl FrequencyGrid {
    /// Grid with the default window `[-(2 n_max^2 + 8), 2 n_max^2 + 8]`.
    pub fn new(dimension: usize, n_max: i32, tau_step: f64) -> Result<Self> {
        let n = n_max as f64;
        let w = 2.0 * n * n + 8.0;
        Self::with_window(dimension, n_max, -w, w, tau_step)
    }

    /// Grid with the window `[-tau_max, tau_max]`.
    pub fn symmetric(dimension: usize, n_max: i32, tau_max: f64, tau_step: f64) -> Result<Self> {
        Self::with_window(dimension, n_max, -tau_max, tau_max, tau_step)
    }

    pub fn with_window(
        dimension: usize,
        n_max: i32,
        tau_min: f64,
        tau_max: f64,
        tau_step: f64,
    ) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidGrid(m));
        if dimension != 1 && dimension != 2 {
            return bad(format!("dimension must be 1 or 2, got {dimension}"));
        }
        if !(1..=1 << 20).contains(&n_max) {
            return bad(format!("n_max must lie in 1..=2^20, got {n_max}"));
        }
        if !(tau_step.is_finite() && tau_step > 0.0) {
            return bad(format!("tau_step must be positive, got {tau_step}"));
        }
        if !(tau_min.is_finite() && tau_max.is_finite() && tau_min < 0.0 && tau_max > 0.0) {
            return bad(format!("need tau_min < 0 < tau_max, got [{tau_min}, {tau_max}]"));
        }
        if tau_min != -tau_max {
            return bad(format!("tau window must be symmetric, got [{tau_min}, {tau_max}]"));
        }
        let ratio = tau_max / tau_step;
        let half = ratio.round();
        if (ratio - half).abs() > 1e-9 * ratio.max(1.0) || half < 1.0 {
            return bad(format!(
                "tau_max / tau_step = {ratio} is not a positive integer"
            ));
        }
        if 2.0 * half + 1.0 > MAX_TAU_SAMPLES as f64 {
            return bad(format!("{} tau samples exceed the limit", 2.0 * half + 1.0));
        }
        let need = required_half_width(n_max);
        if tau_max < need {
            return bad(format!(
                "tau window [{tau_min}, {tau_max}] must contain [-{need}, {need}]"
            ));
        }
        Ok(FrequencyGrid {
            dimension,
            n_max,
            tau_step,
            half: half as i64,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }
    pub fn n_max(&self) -> i32 {
        self.n_max
    }
    pub fn tau_step(&self) -> f64 {
        self.tau_step
    }
    pub fn tau_max(&self) -> f64 {
        self.half as f64 * self.tau_step
    }
    pub fn tau_min(&self) -> f64 {
        -self.tau_max()
    }
    /// Index offset of `tau = 0`.
    pub fn half(&self) -> i64 {
        self.half
    }
    /// Number of tau samples.
    pub fn samples(&self) -> usize {
        (2 * self.half + 1) as usize
    }
    /// Number of lattice points in the spatial box.
    pub fn box_size(&self) -> usize {
        (2 * self.n_max as usize + 1).pow(self.dimension as u32)
    }

    pub fn tau(&self, j: usize) -> f64 {
        (j as i64 - self.half) as f64 * self.tau_step
    }

    /// Index of an exact sample, if `tau` lies on the grid.
    pub fn index_of(&self, tau: f64) -> Option<usize> {
        let r = tau / self.tau_step;
        let k = r.round();
        if (r - k).abs() > 1e-9 * r.abs().max(1.0) {
            return None;
        }
        let j = k as i64 + self.half;
        (0..self.samples() as i64).contains(&j).then_some(j as usize)
    }

    /// Nearest sample index, clamped to the window.
    pub fn nearest_index(&self, tau: f64) -> usize {
        let j = (tau / self.tau_step).round() as i64 + self.half;
        j.clamp(0, 2 * self.half) as usize
    }

    /// True when `1 / tau_step` is an integer, so unit-length intervals start and end on samples.
    pub fn unit_aligned(&self) -> bool {
        let r = 1.0 / self.tau_step;
        (r - r.round()).abs() < 1e-9 * r
    }

    pub fn contains(&self, mode: Mode) -> bool {
        let [a, b] = mode.0;
        let m = self.n_max;
        a.abs() <= m && b.abs() <= m && (self.dimension == 2 || b == 0)
    }

    /// All lattice points of the box, first coordinate outermost.
    pub fn modes(&self) -> impl Iterator<Item = Mode> + '_ {
        let m = self.n_max;
        let d2 = self.dimension == 2;
        (-m..=m).flat_map(move |a| {
            let r = if d2 { -m..=m } else { 0..=0 };
            r.map(move |b| Mode([a, b]))
        })
    }

    /// Flat row-major index of a mode inside the box.
    pub fn mode_index(&self, mode: Mode) -> usize {
        let w = 2 * self.n_max as usize + 1;
        let a = (mode.0[0] + self.n_max) as usize;
        if self.dimension == 1 {
            a
        } else {
            a * w + (mode.0[1] + self.n_max) as usize
        }
    }

    /// Same lattice with a different tau window.
    pub fn with_tau_max(&self, tau_max: f64) -> Result<Self> {
        Self::symmetric(self.dimension, self.n_max, tau_max, self.tau_step)
    }
}

/// A spatial frequency. In one dimension the second coordinate is zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Mode(pub [i32; 2]);

impl Mode {
    pub const ZERO: Mode = Mode([0, 0]);

    pub fn new(a: i32, b: i32) -> Self {
        Mode([a, b])
    }
    pub fn norm_sq(self) -> i64 {
        let [a, b] = self.0;
        a as i64 * a as i64 + b as i64 * b as i64
    }
    pub fn norm(self) -> f64 {
        (self.norm_sq() as f64).sqrt()
    }
    pub fn neg(self) -> Self {
        Mode([-self.0[0], -self.0[1]])
    }
    pub fn add(self, o: Mode) -> Self {
        Mode([self.0[0] + o.0[0], self.0[1] + o.0[1]])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_window() {
        let g = FrequencyGrid::new(2, 4, 0.25).unwrap();
        assert_eq!(g.tau_max(), 40.0);
        assert_eq!(g.samples(), 321);
        assert_eq!(g.tau(160), 0.0);
        assert_eq!(g.index_of(-17.0), Some(92));
        assert!(g.unit_aligned());
        assert_eq!(g.box_size(), 81);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(FrequencyGrid::new(3, 4, 0.25).is_err());
        assert!(FrequencyGrid::new(2, 0, 0.25).is_err());
        assert!(FrequencyGrid::new(2, 4, -1.0).is_err());
        assert!(FrequencyGrid::symmetric(2, 4, 30.0, 0.25).is_err());
        assert!(FrequencyGrid::symmetric(2, 4, 40.1, 0.25).is_err());
        assert!(FrequencyGrid::with_window(2, 4, -40.0, 41.0, 0.25).is_err());
        assert!(!FrequencyGrid::new(1, 4, 0.4).unwrap().unit_aligned());
    }

    #[test]
    fn one_dimensional_box() {
        let g = FrequencyGrid::new(1, 3, 0.5).unwrap();
        assert_eq!(g.modes().count(), 7);
        assert!(!g.contains(Mode::new(0, 1)));
        assert_eq!(g.mode_index(Mode::new(3, 0)), 6);
    }

    #[test]
    fn serde_round_trip() {
        let g = FrequencyGrid::new(2, 5, 0.125).unwrap();
        let js = serde_json::to_string(&g).unwrap();
        let back: FrequencyGrid = serde_json::from_str(&js).unwrap();
        assert_eq!(g, back);
    }
}
