//! Numerical range, sectoriality and phases.

mod classify;
mod nrange;
mod phases;

pub use classify::{
    classify, classify_matrix, field_angle, wrap_angle, ClassifyOptions, MinEigFunction, SectorialClass,
    SectorialityReport, DEFAULT_GRID, DEFAULT_TOL,
};
pub use nrange::{nr_boundary, NumericalRangeBoundary, MIN_SAMPLES};
pub(crate) use phases::{decompose_matrix, phases_from_report};
pub use phases::{
    matrix_phases, phase_witness, phases, phases_with, scalar_phase, sectorial_decomposition,
    sectorial_decomposition_with, PhaseVector, SectorialDecomposition,
};
