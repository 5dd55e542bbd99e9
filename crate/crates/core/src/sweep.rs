//! Log-log scaling sweeps over dyadic `N` and threshold scans over `s`.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{
    build_family, conjugate_product, predicted_exponents, FamilyInstance, FamilyKind,
};
pub use crate::families::NormMode;
use crate::norms::{xsb_norm, zsb_norm, NormParams};
use crate::solver::cutoff_product;
use crate::spectral::{
    conjugate_reflect, japanese_bracket, modulation, spacetime_convolve, CutoffSpec,
    FrequencyGrid, SpaceTimeField,
};

/// Slopes above this flag growth, below its negative flag boundedness.
pub const VERDICT_MARGIN: f64 = 0.02;

/// Which bilinear form enters the left-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProductKind {
    /// `conj(u) conj(v)`.
    ConjConj,
    /// `u v`.
    Plain,
}

impl From<FamilyKind> for ProductKind {
    fn from(k: FamilyKind) -> Self {
        match k {
            FamilyKind::RemarkUU => ProductKind::Plain,
            _ => ProductKind::ConjConj,
        }
    }
}

/// Fourier data of the product, exact for piecewise-linear columns when `cutoff` is `None`,
/// and the pseudo-spectral product of `eta_2T`-localized factors otherwise.
pub fn product_data(
    u: &SpaceTimeField,
    v: &SpaceTimeField,
    product: ProductKind,
    cutoff: Option<&CutoffSpec>,
) -> Result<SpaceTimeField> {
    if u.grid() != v.grid() {
        return Err(Error::GridMismatch);
    }
    match (cutoff, product) {
        (None, ProductKind::ConjConj) => {
            Ok(spacetime_convolve(&conjugate_reflect(u), &conjugate_reflect(v))?.field)
        }
        (None, ProductKind::Plain) => Ok(spacetime_convolve(u, v)?.field),
        (Some(c), ProductKind::ConjConj) => cutoff_product(u, v, c),
        (Some(c), ProductKind::Plain) => {
            cutoff_product(&conjugate_reflect(u), &conjugate_reflect(v), c)
        }
    }
}

/// Norm of the product data on the left of the bilinear estimate.
fn lhs_of_product(f: &SpaceTimeField, p: &NormParams, mode: NormMode) -> f64 {
    match mode {
        NormMode::X => xsb_norm(
            f,
            &NormParams {
                b: p.b - 1.0,
                ..*p
            },
        ),
        NormMode::Z => {
            let w = f.map(|n, tau, z| z / japanese_bracket(modulation(n, tau)));
            zsb_norm(&w, p)
        }
    }
}

/// `|| <tau + |n|^2>^{-1} F(product) ||` in `Z^{s,b}` (mode Z) or `X^{s,b}` (mode X).
pub fn bilinear_lhs(
    u: &SpaceTimeField,
    v: &SpaceTimeField,
    p: &NormParams,
    mode: NormMode,
    product: ProductKind,
    cutoff: Option<&CutoffSpec>,
) -> Result<f64> {
    let f = product_data(u, v, product, cutoff)?;
    Ok(lhs_of_product(&f, p, mode))
}

fn factor_norm(u: &SpaceTimeField, p: &NormParams, mode: NormMode) -> f64 {
    match mode {
        NormMode::X => xsb_norm(u, p),
        NormMode::Z => zsb_norm(u, p),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "N")]
    pub n: u64,
    pub u_norm: f64,
    pub v_norm: f64,
    pub lhs: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Divergent,
    Bounded,
    Inconclusive,
}

impl Verdict {
    pub fn from_slope(slope: f64) -> Self {
        if slope > VERDICT_MARGIN {
            Verdict::Divergent
        } else if slope < -VERDICT_MARGIN {
            Verdict::Bounded
        } else {
            Verdict::Inconclusive
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub kind: FamilyKind,
    pub mode: NormMode,
    pub s: f64,
    pub b: f64,
    pub rows: Vec<SweepRow>,
    pub fitted_slope: f64,
    pub fit_residual: f64,
    pub predicted_slope: f64,
    pub verdict: Verdict,
}

impl SweepReport {
    /// One header line and one line per `N`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,u_norm,v_norm,lhs,ratio\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{},{}", r.n, r.u_norm, r.v_norm, r.lhs, r.ratio);
        }
        out
    }

    /// Least-squares slope of `log2(column)` against `log2 N` for an arbitrary row quantity.
    pub fn slope_of(&self, f: impl Fn(&SweepRow) -> f64) -> f64 {
        let xs: Vec<f64> = self.rows.iter().map(|r| r.n as f64).collect();
        let ys: Vec<f64> = self.rows.iter().map(f).collect();
        fit_power_law(&xs, &ys).slope
    }
}

/// Unweighted least-squares line through `(log2 x, log2 y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute deviation from the line in log2 units.
    pub residual: f64,
}

pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> PowerFit {
    let lx: Vec<f64> = xs.iter().map(|x| x.log2()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.log2()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let residual = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).abs())
        .fold(0.0, f64::max);
    PowerFit {
        slope,
        intercept,
        residual,
    }
}

fn check_n_list(n_list: &[u64], grid: &FrequencyGrid) -> Result<()> {
    if n_list.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: n_list.len(),
        });
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("N values must be strictly increasing".into()));
    }
    for &n in n_list {
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::NotDyadic(n));
        }
        if n > grid.n_max() as u64 {
            return Err(Error::SupportEscape(format!(
                "spatial bound: N = {n} exceeds n_max = {}",
                grid.n_max()
            )));
        }
    }
    Ok(())
}

/// Smallest two-dimensional grid with default window and `tau_step = 0.25` holding every `N`.
pub fn family_grid(n_list: &[u64]) -> Result<FrequencyGrid> {
    let top = n_list.iter().copied().max().unwrap_or(1).max(1);
    if top > 1 << 20 {
        return Err(Error::InvalidParameter(format!("N = {top} is too large")));
    }
    FrequencyGrid::new(2, top as i32, 0.25)
}

struct Prepared {
    inst: FamilyInstance,
    product: SpaceTimeField,
}

fn prepare(kind: FamilyKind, n_list: &[u64], grid: &FrequencyGrid) -> Result<Vec<Prepared>> {
    n_list
        .par_iter()
        .map(|&n| {
            let inst = build_family(kind, n, grid)?;
            let product = conjugate_product(&inst);
            Ok(Prepared { inst, product })
        })
        .collect()
}

fn report_from(kind: FamilyKind, p: &NormParams, mode: NormMode, prep: &[Prepared]) -> SweepReport {
    let rows: Vec<SweepRow> = prep
        .par_iter()
        .map(|x| {
            let u_norm = factor_norm(&x.inst.u, p, mode);
            let v_norm = factor_norm(&x.inst.v, p, mode);
            let lhs = lhs_of_product(&x.product, p, mode);
            SweepRow {
                n: x.inst.n,
                u_norm,
                v_norm,
                lhs,
                ratio: lhs / (u_norm * v_norm),
            }
        })
        .collect();
    let xs: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let fit = fit_power_law(&xs, &ys);
    SweepReport {
        kind,
        mode,
        s: p.s,
        b: p.b,
        rows,
        fitted_slope: fit.slope,
        fit_residual: fit.residual,
        predicted_slope: predicted_exponents(kind, p.s, p.b, mode).ratio_slope,
        verdict: Verdict::from_slope(fit.slope),
    }
}

/// Norms, ratios and fitted ratio slope of a family over `n_list`.
pub fn run_sweep(
    kind: FamilyKind,
    n_list: &[u64],
    p: &NormParams,
    mode: NormMode,
    grid: &FrequencyGrid,
) -> Result<SweepReport> {
    check_n_list(n_list, grid)?;
    let prep = prepare(kind, n_list, grid)?;
    Ok(report_from(kind, p, mode, &prep))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdScan {
    pub kind: FamilyKind,
    pub mode: NormMode,
    pub b: f64,
    #[serde(rename = "N")]
    pub n_list: Vec<u64>,
    /// `(s, fitted ratio slope)` in scan order.
    pub points: Vec<(f64, f64)>,
    /// Every sign change, located by linear interpolation.
    pub crossings: Vec<f64>,
    /// The first crossing, if any.
    pub crossing: Option<f64>,
}

/// Zeros of the piecewise-linear interpolant through `points`.
pub fn sign_changes(points: &[(f64, f64)]) -> Vec<f64> {
    let mut out = Vec::new();
    for w in points.windows(2) {
        let ((s0, m0), (s1, m1)) = (w[0], w[1]);
        if m0 == 0.0 {
            if out.last() != Some(&s0) {
                out.push(s0);
            }
        } else if m0 * m1 < 0.0 {
            out.push(s0 - m0 * (s1 - s0) / (m1 - m0));
        }
    }
    if let Some(&(s, m)) = points.last() {
        if m == 0.0 && out.last() != Some(&s) {
            out.push(s);
        }
    }
    out
}

/// Fitted ratio slope for every `s` in `s_list` and the interpolated sign change.
pub fn threshold_scan(
    kind: FamilyKind,
    s_list: &[f64],
    base: &NormParams,
    mode: NormMode,
    n_list: &[u64],
    grid: &FrequencyGrid,
) -> Result<ThresholdScan> {
    if s_list.is_empty() || s_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "s values must be nonempty and strictly increasing".into(),
        ));
    }
    check_n_list(n_list, grid)?;
    let prep = prepare(kind, n_list, grid)?;
    let points: Vec<(f64, f64)> = s_list
        .iter()
        .map(|&s| {
            let p = NormParams { s, ..*base };
            (s, report_from(kind, &p, mode, &prep).fitted_slope)
        })
        .collect();
    let crossings = sign_changes(&points);
    Ok(ThresholdScan {
        kind,
        mode,
        b: base.b,
        n_list: n_list.to_vec(),
        crossing: crossings.first().copied(),
        crossings,
        points,
    })
}

/// Inclusive arithmetic range `start, start + step, ...` up to `end` (with a small tolerance).
pub fn s_range(start: f64, end: f64, step: f64) -> Result<Vec<f64>> {
    if !(start.is_finite() && end.is_finite() && step.is_finite()) || step <= 0.0 || end < start {
        return Err(Error::InvalidParameter(format!(
            "range {start}:{end}:{step} is empty or malformed"
        )));
    }
    let span = ((end - start) / step + 1e-9).floor();
    if !(span < 100_000.0) {
        return Err(Error::InvalidParameter(format!("range {start}:{end}:{step} is too long")));
    }
    let count = span as usize + 1;
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}
