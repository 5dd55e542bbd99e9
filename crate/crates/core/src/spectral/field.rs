use std::collections::BTreeMap;

use num_complex::Complex64;

use super::grid::{FrequencyGrid, Mode};
use crate::error::{Error, Result};

/// Samples of one spatial mode on a contiguous run of tau indices.
///
/// Values are read as a piecewise-linear function that vanishes outside the run.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub start: usize,
    pub values: Vec<Complex64>,
}

impl Column {
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
    /// One past the last tau index.
    pub fn end(&self) -> usize {
        self.start + self.values.len()
    }
    pub fn get(&self, j: usize) -> Complex64 {
        if j < self.start || j >= self.end() {
            Complex64::new(0.0, 0.0)
        } else {
            self.values[j - self.start]
        }
    }
    /// Trapezoid weight of local sample `i`.
    pub fn weight(&self, i: usize, h: f64) -> f64 {
        let n = self.values.len();
        if n < 2 {
            0.0
        } else if i == 0 || i == n - 1 {
            0.5 * h
        } else {
            h
        }
    }
    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }
}

/// Space-time Fourier data `u^(n, tau)` on a [`FrequencyGrid`], stored column by column.
/// Modes without a column are identically zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    grid: FrequencyGrid,
    columns: BTreeMap<Mode, Column>,
}

impl SpaceTimeField {
    pub fn zeros(grid: FrequencyGrid) -> Self {
        SpaceTimeField {
            grid,
            columns: BTreeMap::new(),
        }
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    /// Insert or replace the column at `mode`.
    pub fn insert(&mut self, mode: Mode, start: usize, values: Vec<Complex64>) -> Result<()> {
        if !self.grid.contains(mode) {
            return Err(Error::ModeOutOfBox {
                mode: mode.0,
                n_max: self.grid.n_max(),
            });
        }
        let samples = self.grid.samples();
        if values.is_empty() || start.checked_add(values.len()).is_none_or(|e| e > samples) {
            return Err(Error::ColumnOutOfWindow {
                mode: mode.0,
                start,
                len: values.len(),
                samples,
            });
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite(mode.0));
        }
        self.columns.insert(mode, Column { start, values });
        Ok(())
    }

    /// Column at `mode` sampled from `f(tau)` for every grid tau in `[lo, hi]`.
    pub fn insert_fn(
        &mut self,
        mode: Mode,
        lo: f64,
        hi: f64,
        f: impl Fn(f64) -> Complex64,
    ) -> Result<()> {
        let h = self.grid.tau_step();
        let a = ((lo / h).ceil() as i64 + self.grid.half()).max(0);
        let b = ((hi / h).floor() as i64 + self.grid.half()).min(self.grid.samples() as i64 - 1);
        if b < a {
            return Err(Error::ColumnOutOfWindow {
                mode: mode.0,
                start: a.max(0) as usize,
                len: 0,
                samples: self.grid.samples(),
            });
        }
        let values = (a..=b).map(|j| f(self.grid.tau(j as usize))).collect();
        self.insert(mode, a as usize, values)
    }

    pub fn column(&self, mode: Mode) -> Option<&Column> {
        self.columns.get(&mode)
    }

    pub fn columns(&self) -> impl ExactSizeIterator<Item = (&Mode, &Column)> {
        self.columns.iter()
    }

    pub fn column_count(&self) -> usize {
        self.columns.len()
    }

    pub fn get(&self, mode: Mode, j: usize) -> Complex64 {
        self.columns
            .get(&mode)
            .map_or(Complex64::new(0.0, 0.0), |c| c.get(j))
    }

    /// Modes carrying at least one nonzero sample.
    pub fn support(&self) -> Vec<Mode> {
        self.columns
            .iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(m, _)| *m)
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.columns.values().all(Column::is_zero)
    }

    /// Apply `f(mode, tau, value)` to every stored sample, keeping extents.
    pub fn map(&self, f: impl Fn(Mode, f64, Complex64) -> Complex64) -> Self {
        let columns = self
            .columns
            .iter()
            .map(|(&m, c)| {
                let values = c
                    .values
                    .iter()
                    .enumerate()
                    .map(|(i, &z)| f(m, self.grid.tau(c.start + i), z))
                    .collect();
                (m, Column { start: c.start, values })
            })
            .collect();
        SpaceTimeField {
            grid: self.grid,
            columns,
        }
    }

    /// Drop columns whose mode fails `keep`.
    pub fn retain_modes(&self, keep: impl Fn(Mode) -> bool) -> Self {
        SpaceTimeField {
            grid: self.grid,
            columns: self
                .columns
                .iter()
                .filter(|(m, _)| keep(**m))
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, a: Complex64) -> Self {
        self.map(|_, _, z| a * z)
    }

    /// `a * self + other`. Columns with different extents are padded to their union.
    pub fn axpy(&self, a: Complex64, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let mut columns = BTreeMap::new();
        let modes: std::collections::BTreeSet<Mode> = self
            .columns
            .keys()
            .chain(other.columns.keys())
            .copied()
            .collect();
        for m in modes {
            let col = match (self.columns.get(&m), other.columns.get(&m)) {
                (Some(x), None) => Column {
                    start: x.start,
                    values: x.values.iter().map(|&z| a * z).collect(),
                },
                (None, Some(y)) => y.clone(),
                (Some(x), Some(y)) => {
                    let start = x.start.min(y.start);
                    let end = x.end().max(y.end());
                    let values = (start..end).map(|j| a * x.get(j) + y.get(j)).collect();
                    Column { start, values }
                }
                (None, None) => unreachable!(),
            };
            columns.insert(m, col);
        }
        Ok(SpaceTimeField {
            grid: self.grid,
            columns,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.axpy(Complex64::new(1.0, 0.0), other)
    }

    /// `self - other`.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        other.axpy(Complex64::new(-1.0, 0.0), self)
    }

    /// Largest absolute difference between two fields on the same grid.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        let d = self.sub(other)?;
        Ok(d.columns
            .values()
            .flat_map(|c| c.values.iter())
            .fold(0.0, |m, z| m.max(z.norm())))
    }

    pub(crate) fn from_columns(grid: FrequencyGrid, columns: BTreeMap<Mode, Column>) -> Self {
        SpaceTimeField { grid, columns }
    }
}

/// Dense spatial Fourier coefficients `phi^(n)` over the whole box of a lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialField {
    dimension: usize,
    n_max: i32,
    coeffs: Vec<Complex64>,
}

impl SpatialField {
    pub fn zeros(dimension: usize, n_max: i32) -> Self {
        let len = (2 * n_max as usize + 1).pow(dimension as u32);
        SpatialField {
            dimension,
            n_max,
            coeffs: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    /// Coefficients in row-major box order, first coordinate outermost.
    pub fn from_vec(dimension: usize, n_max: i32, coeffs: Vec<Complex64>) -> Result<Self> {
        if dimension != 1 && dimension != 2 || n_max < 1 {
            return Err(Error::ShapeMismatch(format!(
                "dimension {dimension}, n_max {n_max}"
            )));
        }
        let len = (2 * n_max as usize + 1).pow(dimension as u32);
        if coeffs.len() != len {
            return Err(Error::ShapeMismatch(format!(
                "expected {len} coefficients, got {}",
                coeffs.len()
            )));
        }
        Ok(SpatialField {
            dimension,
            n_max,
            coeffs,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }
    pub fn n_max(&self) -> i32 {
        self.n_max
    }
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn modes(&self) -> impl Iterator<Item = Mode> + '_ {
        let m = self.n_max;
        let d2 = self.dimension == 2;
        (-m..=m).flat_map(move |a| {
            let r = if d2 { -m..=m } else { 0..=0 };
            r.map(move |b| Mode([a, b]))
        })
    }

    fn index(&self, mode: Mode) -> Option<usize> {
        let m = self.n_max;
        let [a, b] = mode.0;
        if a.abs() > m || b.abs() > m || (self.dimension == 1 && b != 0) {
            return None;
        }
        let w = 2 * m as usize + 1;
        let i = (a + m) as usize;
        Some(if self.dimension == 1 {
            i
        } else {
            i * w + (b + m) as usize
        })
    }

    pub fn get(&self, mode: Mode) -> Complex64 {
        self.index(mode)
            .map_or(Complex64::new(0.0, 0.0), |i| self.coeffs[i])
    }

    pub fn set(&mut self, mode: Mode, z: Complex64) -> Result<()> {
        let i = self.index(mode).ok_or(Error::ModeOutOfBox {
            mode: mode.0,
            n_max: self.n_max,
        })?;
        self.coeffs[i] = z;
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (Mode, Complex64)> + '_ {
        self.modes().zip(self.coeffs.iter().copied())
    }

    /// `(sum <n>^{2s} |phi^(n)|^2)^{1/2}`.
    pub fn hs_norm(&self, s: f64) -> f64 {
        self.iter()
            .map(|(m, z)| (1.0 + m.norm_sq() as f64).powf(s) * z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&self, a: f64) -> Self {
        SpatialField {
            coeffs: self.coeffs.iter().map(|z| z * a).collect(),
            ..self.clone()
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.dimension != other.dimension || self.n_max != other.n_max {
            return Err(Error::ShapeMismatch("spatial fields differ in shape".into()));
        }
        Ok(SpatialField {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
            ..self.clone()
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        other.sub(&self.scale(-1.0))
    }
}
