use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::duhamel::duhamel_terms;
use crate::error::Error;
use crate::norms::{ct_hs_norm, zsb_norm, NormParams};
use crate::spectral::{free_evolution_data, CutoffSpec, FrequencyGrid, SpaceTimeField, SpatialField};

/// Modulation exponent of the solution space.
pub const SOLVER_B: f64 = 2.0 / 3.0;

/// Iterates leaving `DIVERGENCE_FACTOR * ball_radius` abort the iteration.
pub const DIVERGENCE_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    pub s: f64,
    pub max_iterations: usize,
    /// Stop once the `Z^{s,2/3}` norm of consecutive differences drops below this.
    pub contraction_tolerance: f64,
    /// Defaults to twice the norm of the first iterate.
    pub ball_radius: Option<f64>,
    /// Keep every iterate in the trace, not only the last one.
    pub keep_iterates: bool,
}

impl SolverParams {
    pub fn new(s: f64) -> Result<Self, Error> {
        let p = SolverParams {
            s,
            max_iterations: 60,
            contraction_tolerance: 1e-10,
            ball_radius: None,
            keep_iterates: false,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(self.s > -2.0 / 3.0) || !self.s.is_finite() {
            return Err(Error::InvalidParameter(format!("solver needs s > -2/3, got {}", self.s)));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("max_iterations must be positive".into()));
        }
        if !(self.contraction_tolerance > 0.0) {
            return Err(Error::InvalidParameter("contraction_tolerance must be positive".into()));
        }
        if let Some(r) = self.ball_radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::InvalidParameter(format!("ball_radius must be positive, got {r}")));
            }
        }
        Ok(())
    }

    pub fn norm_params(&self) -> NormParams {
        NormParams {
            s: self.s,
            b: SOLVER_B,
            ..NormParams::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    pub t: f64,
    pub s: f64,
    pub ball_radius: f64,
    /// Every iterate when requested, otherwise empty.
    pub iterates: Vec<SpaceTimeField>,
    /// The last iterate computed.
    pub solution: SpaceTimeField,
    pub z_norms: Vec<f64>,
    pub successive_diffs: Vec<f64>,
    pub contraction_ratios: Vec<f64>,
    pub converged: bool,
}

/// Serializable summary of a trace without the fields themselves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    #[serde(rename = "T")]
    pub t: f64,
    pub s: f64,
    pub ball_radius: f64,
    pub iterations: usize,
    pub converged: bool,
    pub z_norms: Vec<f64>,
    pub successive_diffs: Vec<f64>,
    pub contraction_ratios: Vec<f64>,
}

impl IterationTrace {
    pub fn summary(&self) -> TraceSummary {
        TraceSummary {
            t: self.t,
            s: self.s,
            ball_radius: self.ball_radius,
            iterations: self.successive_diffs.len(),
            converged: self.converged,
            z_norms: self.z_norms.clone(),
            successive_diffs: self.successive_diffs.clone(),
            contraction_ratios: self.contraction_ratios.clone(),
        }
    }

    /// Median of the contraction ratios, if any were recorded.
    pub fn median_ratio(&self) -> Option<f64> {
        let mut r = self.contraction_ratios.clone();
        if r.is_empty() {
            return None;
        }
        r.sort_by(f64::total_cmp);
        let k = r.len();
        Some(if k % 2 == 1 {
            r[k / 2]
        } else {
            0.5 * (r[k / 2 - 1] + r[k / 2])
        })
    }

    /// Longest run of consecutive ratios strictly below `bound`.
    pub fn longest_run_below(&self, bound: f64) -> usize {
        let mut best = 0;
        let mut cur = 0;
        for &r in &self.contraction_ratios {
            if r < bound {
                cur += 1;
                best = best.max(cur);
            } else {
                cur = 0;
            }
        }
        best
    }
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Invalid(#[from] Error),
    #[error("iterate {iteration} left the ball: Z norm {norm} > {limit}")]
    Diverged {
        iteration: usize,
        norm: f64,
        limit: f64,
        trace: Box<IterationTrace>,
    },
}

/// The lattice the solver works on must match the data.
fn check_shapes(u0: &SpatialField, grid: &FrequencyGrid) -> Result<(), Error> {
    if u0.dimension() != grid.dimension() || u0.n_max() != grid.n_max() {
        return Err(Error::ShapeMismatch(format!(
            "initial data is d={} n_max={}, grid is d={} n_max={}",
            u0.dimension(),
            u0.n_max(),
            grid.dimension(),
            grid.n_max()
        )));
    }
    Ok(())
}

/// `eta(t) e^{it Laplacian} u0` over the whole tau window.
pub fn linear_solution(
    u0: &SpatialField,
    grid: &FrequencyGrid,
    cutoff: &CutoffSpec,
) -> Result<SpaceTimeField, Error> {
    check_shapes(u0, grid)?;
    super::check_solver_grid(grid)?;
    let full = cutoff.with_profile_cut(f64::INFINITY)?;
    free_evolution_data(u0, &full, grid)
}

/// `Gamma[u] = eta e^{it Laplacian} u0 + N1 + N2 + N3`, with the linear part precomputed.
pub fn gamma(
    linear: &SpaceTimeField,
    u: &SpaceTimeField,
    cutoff: &CutoffSpec,
) -> Result<SpaceTimeField, Error> {
    let parts = duhamel_terms(u, u, cutoff)?;
    linear.add(&parts.sum()?)
}

/// Picard iteration from the linear solution.
pub fn picard_solve(
    u0: &SpatialField,
    grid: &FrequencyGrid,
    params: &SolverParams,
    cutoff: &CutoffSpec,
) -> Result<IterationTrace, SolverError> {
    let linear = linear_solution(u0, grid, cutoff)?;
    iterate(&linear, linear.clone(), params, cutoff)
}

/// Picard iteration from a caller-supplied first iterate.
pub fn picard_solve_from(
    u0: &SpatialField,
    initial: SpaceTimeField,
    params: &SolverParams,
    cutoff: &CutoffSpec,
) -> Result<IterationTrace, SolverError> {
    let linear = linear_solution(u0, initial.grid(), cutoff)?;
    iterate(&linear, initial, params, cutoff)
}

fn iterate(
    linear: &SpaceTimeField,
    start: SpaceTimeField,
    params: &SolverParams,
    cutoff: &CutoffSpec,
) -> Result<IterationTrace, SolverError> {
    params.validate()?;
    if start.grid() != linear.grid() {
        return Err(Error::GridMismatch.into());
    }
    let np = params.norm_params();
    let z0 = zsb_norm(linear, &np);
    let radius = params.ball_radius.unwrap_or(2.0 * z0);
    let limit = DIVERGENCE_FACTOR * radius;
    let mut trace = IterationTrace {
        t: cutoff.t(),
        s: params.s,
        ball_radius: radius,
        iterates: Vec::new(),
        z_norms: vec![zsb_norm(&start, &np)],
        solution: start,
        successive_diffs: Vec::new(),
        contraction_ratios: Vec::new(),
        converged: false,
    };
    if params.keep_iterates {
        trace.iterates.push(trace.solution.clone());
    }
    for k in 0..params.max_iterations {
        let next = gamma(linear, &trace.solution, cutoff)?;
        let diff = zsb_norm(&next.sub(&trace.solution)?, &np);
        let z = zsb_norm(&next, &np);
        if let Some(&prev) = trace.successive_diffs.last() {
            if prev > params.contraction_tolerance {
                trace.contraction_ratios.push(diff / prev);
            }
        }
        trace.successive_diffs.push(diff);
        trace.z_norms.push(z);
        trace.solution = next;
        if params.keep_iterates {
            trace.iterates.push(trace.solution.clone());
        }
        if !z.is_finite() || z > limit {
            return Err(SolverError::Diverged {
                iteration: k + 1,
                norm: z,
                limit,
                trace: Box::new(trace),
            });
        }
        if diff < params.contraction_tolerance {
            trace.converged = true;
            break;
        }
    }
    Ok(trace)
}

/// Distances between two solves and their quotient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dependence {
    pub input_dist: f64,
    pub output_dist: f64,
    pub quotient: f64,
}

/// `||u0a - u0b||_{H^s}`, the `C_t H^s([-T, T])` distance of the solutions, and their quotient.
pub fn continuous_dependence(
    u0a: &SpatialField,
    u0b: &SpatialField,
    grid: &FrequencyGrid,
    params: &SolverParams,
    cutoff: &CutoffSpec,
) -> Result<Dependence, SolverError> {
    let a = picard_solve(u0a, grid, params, cutoff)?;
    dependence_against(u0a, &a.solution, u0b, params, cutoff)
}

/// As [`continuous_dependence`], reusing an existing solution for `u0a`.
pub fn dependence_against(
    u0a: &SpatialField,
    solution_a: &SpaceTimeField,
    u0b: &SpatialField,
    params: &SolverParams,
    cutoff: &CutoffSpec,
) -> Result<Dependence, SolverError> {
    let input = u0a.sub(u0b)?.hs_norm(params.s);
    let b = picard_solve(u0b, solution_a.grid(), params, cutoff)?;
    let d = solution_a.sub(&b.solution)?;
    let t = cutoff.t();
    let output = ct_hs_norm(&d, params.s, (-t, t))?;
    let quotient = if input > 0.0 { output / input } else { 0.0 };
    Ok(Dependence {
        input_dist: input,
        output_dist: output,
        quotient,
    })
}

/// Fitted exponent `theta` in `ratio ~ T^theta` from `(T, ratio)` pairs.
pub fn fit_theta(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    Some(crate::sweep::fit_power_law(&xs, &ys).slope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn zero_data_stays_zero() {
        let g = FrequencyGrid::symmetric(1, 4, 64.0, 0.5).unwrap();
        let c = CutoffSpec::new(0.125).unwrap();
        let p = SolverParams::new(-0.6).unwrap();
        let tr = picard_solve(&SpatialField::zeros(1, 4), &g, &p, &c).unwrap();
        assert!(tr.converged);
        assert!(tr.solution.is_zero());
        assert!(tr.z_norms.iter().all(|&z| z == 0.0));
    }

    #[test]
    fn params_validation() {
        assert!(SolverParams::new(-0.7).is_err());
        assert!(SolverParams::new(-0.6).is_ok());
        let mut p = SolverParams::new(0.0).unwrap();
        p.ball_radius = Some(-1.0);
        assert!(p.validate().is_err());
    }

    #[test]
    fn fixed_point_of_small_data() {
        let g = FrequencyGrid::symmetric(1, 4, 128.0, 0.5).unwrap();
        let c = CutoffSpec::new(0.125).unwrap();
        let p = SolverParams {
            contraction_tolerance: 1e-12,
            ..SolverParams::new(0.0).unwrap()
        };
        let mut u0 = SpatialField::zeros(1, 4);
        u0.set(crate::spectral::Mode::new(1, 0), Complex64::new(0.3, 0.1)).unwrap();
        u0.set(crate::spectral::Mode::new(-2, 0), Complex64::new(0.0, 0.2)).unwrap();
        let tr = picard_solve(&u0, &g, &p, &c).unwrap();
        assert!(tr.converged, "{:?}", tr.successive_diffs);
        let lin = linear_solution(&u0, &g, &c).unwrap();
        let again = gamma(&lin, &tr.solution, &c).unwrap();
        let res = zsb_norm(&again.sub(&tr.solution).unwrap(), &p.norm_params());
        assert!(res <= p.contraction_tolerance, "{res}");
    }
}
