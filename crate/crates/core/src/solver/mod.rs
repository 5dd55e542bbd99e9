//! Duhamel formulation with time cutoffs, Picard iteration and a classical reference integrator.

mod duhamel;
mod picard;
mod product;
mod reference;

pub use crate::spectral::CutoffSpec;
pub use duhamel::{
    duhamel_from_product, duhamel_n1, duhamel_n2, duhamel_n3, duhamel_terms, DuhamelParts,
    MAX_TAYLOR_ORDER,
};
pub use picard::{
    continuous_dependence, dependence_against, fit_theta, gamma, linear_solution, picard_solve, picard_solve_from,
    Dependence, IterationTrace, SolverError, SolverParams, TraceSummary, DIVERGENCE_FACTOR,
    SOLVER_B,
};
pub use product::{check_solver_grid, cutoff_product};
pub use reference::{reference_integrate, reference_integrate_with, Nonlinearity, Trajectory};
