//! Counting zeros and critical points of fields on compact boxes.
//!
//! Counting is heuristic: a tensor grid seeds damped Newton iterations, and
//! the located zeros are deduplicated. Each count carries a `suspect` flag
//! for the situations where the heuristic may have missed or merged zeros.
//! On top of the counter sit a Bezout check for polynomial systems, a
//! Crofton estimator of nodal volumes and empirical moment experiments for
//! Bargmann–Fock sample paths.

mod bezout;
mod count;
mod crofton;
mod experiment;
mod grid;
mod newton;

pub use bezout::{
    bezout_check, polynomial_roots, root_backward_error, BezoutCheck, ROOT_CHECK_TOL,
};
pub use count::{
    adapted_critical_spacing, adapted_spacing, count_critical_points, count_path_critical_points,
    count_path_zeros, count_zeros, count_zeros_on_grid, CountOptions, ZeroSet, DEDUPE_FRACTION,
    DEFAULT_POINTS_PER_UNIT, REFINE_DEPTH,
};
pub use crofton::{
    crofton_constant, crofton_volume, sphere_volume, CroftonEstimate, CroftonOptions,
};
pub use experiment::{
    moment_experiment, CountTarget, MomentEstimate, MomentExperiment, MomentReport, SampleCount,
    CELLS_PER_GAP,
};
pub use grid::{grid_axes, GridSample};
pub use newton::{NewtonOptions, NEAR_SINGULAR_RATIO};
