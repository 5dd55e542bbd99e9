//! Space-time frequency lattice and the linear operations on it.

mod cutoff;
mod fft;
mod field;
mod grid;
mod ops;
mod synthesis;

pub use cutoff::{bump, free_evolution_data, CutoffSpec, ProfileTable, DEFAULT_PROFILE_CUT};
#[allow(unused_imports)]
pub(crate) use cutoff::unit_steps;
pub use fft::{fast_len, fft_1d, fft_nd};
pub use field::{Column, SpaceTimeField, SpatialField};
pub use grid::{required_half_width, FrequencyGrid, GridSpec, Mode, MAX_TAU_SAMPLES};
pub use ops::{
    conjugate_reflect, is_lo, japanese_bracket, modulation, project_dyadic, project_modulation,
    spacetime_convolve, Convolution, DyadicBlock, Side, MOD_THRESHOLD,
};
pub use synthesis::{column_on_lattice, column_value, spatial_at};
