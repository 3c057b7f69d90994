//! Worst-case error oracles and the bound formulas they are compared against.

pub mod bounds;
mod wce;

pub use bounds::{bound, choose_m, max_m_under_spectral, BoundInputs, BoundReport, ETA, KAPPA};
pub use wce::{
    error_matrix, exact_wce_discretization, exact_wce_recovery, triangle_combination,
    wce_nullspace_component, NullspaceComponent, WceMethod, WceValue, DENSE_LIMIT,
};
