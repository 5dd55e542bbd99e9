//! Closed-form counterexample families and their predicted scaling exponents.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{
    conjugate_reflect, spacetime_convolve, FrequencyGrid, Mode, SpaceTimeField,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    /// `u = 1_{n = N e1} 1_{[-1,1]}(tau + N^2)`, `v = 1_{n = -N e1} 1_{[-1,1]}(tau + N^2)`.
    Example1,
    /// `u` as above, `v = 1_{n = -N e1} 1_{[-1,1]}(-tau + N^2)`.
    Example2,
    /// `u` as above, `v = 1_{n = N e2} 1_{[-1,1]}(tau + N^2)`; the product is `u v`.
    #[serde(rename = "remarkuu")]
    RemarkUU,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 3] = [FamilyKind::Example1, FamilyKind::Example2, FamilyKind::RemarkUU];

    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Example1 => "example1",
            FamilyKind::Example2 => "example2",
            FamilyKind::RemarkUU => "remarkuu",
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "example1" | "ex1" => Ok(FamilyKind::Example1),
            "example2" | "ex2" => Ok(FamilyKind::Example2),
            "remarkuu" | "uu" => Ok(FamilyKind::RemarkUU),
            _ => Err(Error::InvalidParameter(format!(
                "unknown family '{s}' (expected example1, example2 or remarkuu)"
            ))),
        }
    }
}

/// Which left-hand norm a sweep measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NormMode {
    /// Factors in `X^{s,b}`, product in `X^{s,b-1}`.
    X,
    /// Factors in `Z^{s,b}`, product weighted by `<tau + |n|^2>^{-1}` in `Z^{s,b}`.
    Z,
}

impl FromStr for NormMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "X" | "x" => Ok(NormMode::X),
            "Z" | "z" => Ok(NormMode::Z),
            _ => Err(Error::InvalidParameter(format!("unknown mode '{s}' (expected X or Z)"))),
        }
    }
}

impl fmt::Display for NormMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormMode::X => "X",
            NormMode::Z => "Z",
        })
    }
}

/// One member of a family at a fixed dyadic `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyInstance {
    pub kind: FamilyKind,
    pub n: u64,
    pub u: SpaceTimeField,
    pub v: SpaceTimeField,
}

fn indicator(grid: FrequencyGrid, mode: Mode, center: f64) -> Result<SpaceTimeField> {
    let mut f = SpaceTimeField::zeros(grid);
    f.insert_fn(mode, center - 1.0, center + 1.0, |_| Complex64::new(1.0, 0.0))?;
    Ok(f)
}

pub fn build_family(kind: FamilyKind, n: u64, grid: &FrequencyGrid) -> Result<FamilyInstance> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::NotDyadic(n));
    }
    if n > grid.n_max() as u64 {
        return Err(Error::SupportEscape(format!(
            "spatial bound: N = {n} exceeds n_max = {}",
            grid.n_max()
        )));
    }
    if kind == FamilyKind::RemarkUU && grid.dimension() != 2 {
        return Err(Error::SupportEscape(
            "spatial bound: remarkuu needs e2, i.e. dimension 2".into(),
        ));
    }
    let nf = n as f64;
    let reach = nf * nf + 1.0;
    if grid.tau_max() < reach {
        return Err(Error::SupportEscape(format!(
            "temporal bound: window [{}, {}] must contain +-{reach}",
            grid.tau_min(),
            grid.tau_max()
        )));
    }
    if !grid.unit_aligned() {
        return Err(Error::InvalidGrid(format!(
            "indicator endpoints need 1 / tau_step integral, tau_step = {}",
            grid.tau_step()
        )));
    }
    let ni = n as i32;
    let e1 = Mode::new(ni, 0);
    let u = indicator(*grid, e1, -nf * nf)?;
    let v = match kind {
        FamilyKind::Example1 => indicator(*grid, e1.neg(), -nf * nf)?,
        FamilyKind::Example2 => indicator(*grid, e1.neg(), nf * nf)?,
        FamilyKind::RemarkUU => indicator(*grid, Mode::new(0, ni), -nf * nf)?,
    };
    Ok(FamilyInstance { kind, n, u, v })
}

/// Fourier data of `conj(u) conj(v)`, or of `u v` for [`FamilyKind::RemarkUU`].
pub fn conjugate_product(inst: &FamilyInstance) -> SpaceTimeField {
    let conv = match inst.kind {
        FamilyKind::RemarkUU => spacetime_convolve(&inst.u, &inst.v),
        _ => spacetime_convolve(&conjugate_reflect(&inst.u), &conjugate_reflect(&inst.v)),
    };
    conv.expect("family factors share a grid").field
}

/// Column and tent center of the closed-form product.
pub fn product_location(kind: FamilyKind, n: u64) -> (Mode, f64) {
    let nf = n as f64;
    let ni = n as i32;
    match kind {
        FamilyKind::Example1 => (Mode::ZERO, 2.0 * nf * nf),
        FamilyKind::Example2 => (Mode::ZERO, 0.0),
        FamilyKind::RemarkUU => (Mode::new(ni, ni), -2.0 * nf * nf),
    }
}

/// `max(0, 2 - |tau - center|)`.
pub fn tent(tau: f64, center: f64) -> f64 {
    (2.0 - (tau - center).abs()).max(0.0)
}

/// Predicted log-log slopes in `N` of the factor norms, the left-hand norm and their ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictedExponents {
    pub u_norm_slope: f64,
    pub v_norm_slope: f64,
    pub product_slope: f64,
    pub ratio_slope: f64,
}

pub fn predicted_exponents(kind: FamilyKind, s: f64, b: f64, mode: NormMode) -> PredictedExponents {
    let (u, v, product) = match (kind, mode) {
        (FamilyKind::Example1, NormMode::X) => (s, s, 2.0 * b - 2.0),
        // The hi-modulation product is measured in Y: the weighted L2 term beats the
        // N^{-2} energy term as long as s + 2b >= 0.
        (FamilyKind::Example1, NormMode::Z) => (s, s, (s + 2.0 * b - 2.0).max(-2.0)),
        (FamilyKind::Example2, _) => (s, s + 2.0 * b, 0.0),
        (FamilyKind::RemarkUU, _) => (s, s, s),
    };
    PredictedExponents {
        u_norm_slope: u,
        v_norm_slope: v,
        product_slope: product,
        ratio_slope: product - u - v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> FrequencyGrid {
        FrequencyGrid::new(2, 8, 0.25).unwrap()
    }

    #[test]
    fn example1_support() {
        let g = grid();
        let f = build_family(FamilyKind::Example1, 4, &g).unwrap();
        let col = f.u.column(Mode::new(4, 0)).unwrap();
        assert_eq!(col.len(), 9);
        assert_eq!(g.tau(col.start), -17.0);
        assert_eq!(g.tau(col.end() - 1), -15.0);
        assert_eq!(f.u.support(), vec![Mode::new(4, 0)]);
    }

    #[test]
    fn example2_flips_tau() {
        let g = grid();
        let f = build_family(FamilyKind::Example2, 4, &g).unwrap();
        let col = f.v.column(Mode::new(-4, 0)).unwrap();
        assert_eq!((g.tau(col.start), g.tau(col.end() - 1)), (15.0, 17.0));
    }

    #[test]
    fn construction_errors_name_the_bound() {
        let g = grid();
        let e = build_family(FamilyKind::Example1, 16, &g).unwrap_err();
        assert!(e.to_string().contains("spatial"));
        assert!(build_family(FamilyKind::Example1, 3, &g).is_err());
        let g1 = FrequencyGrid::new(1, 8, 0.25).unwrap();
        assert!(build_family(FamilyKind::RemarkUU, 4, &g1).is_err());
        let coarse = FrequencyGrid::new(2, 8, 0.4).unwrap();
        assert!(build_family(FamilyKind::Example1, 4, &coarse).is_err());
    }

    #[test]
    fn products_sit_at_closed_form_location() {
        let g = FrequencyGrid::new(2, 16, 0.25).unwrap();
        for kind in FamilyKind::ALL {
            for n in [1, 2, 4, 8, 16] {
                let f = build_family(kind, n, &g).unwrap();
                let prod = conjugate_product(&f);
                let (mode, center) = product_location(kind, n);
                assert_eq!(prod.support(), vec![mode]);
                let col = prod.column(mode).unwrap();
                for (i, z) in col.values.iter().enumerate() {
                    let want = tent(g.tau(col.start + i), center);
                    assert!((z.re - want).abs() <= 2e-12, "{kind} {n}");
                    assert_eq!(z.im, 0.0);
                }
            }
        }
    }

    #[test]
    fn exponent_table() {
        let p = predicted_exponents(FamilyKind::Example1, -0.6, 2.0 / 3.0, NormMode::X);
        assert!((p.ratio_slope - (4.0 / 3.0 - 2.0 + 1.2)).abs() < 1e-15);
        let b = 0.7;
        let p = predicted_exponents(FamilyKind::Example2, -b, b, NormMode::Z);
        assert!(p.ratio_slope.abs() < 1e-15);
        let p = predicted_exponents(FamilyKind::RemarkUU, 0.0, 0.6, NormMode::Z);
        assert_eq!(
            (p.u_norm_slope, p.v_norm_slope, p.product_slope, p.ratio_slope),
            (0.0, 0.0, 0.0, 0.0)
        );
        assert_eq!("Example-2".parse::<FamilyKind>().unwrap(), FamilyKind::Example2);
    }
}
