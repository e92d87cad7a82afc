//! Block tensors, MLTI state-space systems and frequency-domain stability
//! certificates.

mod blocks;
mod certificates;
mod freq;
mod system;

pub use blocks::{
    block_2x2, block_col, block_row, block_unfold_permutation, perfect_shuffle, split_unfold_permutation,
    PermutationMap,
};
pub use certificates::{
    closed_loop_oracle, cone_condition_check, gang_of_four, polynomial_roots, small_gain_check, small_phase_check,
    stability_report, ConeRecord, ConeReport, Criterion, FrequencyRecord, LoopVerdict, ScalarWeight, SmallGain,
    StabilityReport, Verdict, CERTIFICATE_TOL, ORACLE_MARGIN,
};
pub use freq::{
    freq_phase_profile, hinf_norm, FrequencyGrid, HinfNorm, PhasePoint, DEFAULT_POINTS, DEFAULT_WMAX, DEFAULT_WMIN,
    SWEEP_CLASSIFY_GRID,
};
pub use system::{random_passive_system, random_stable_system, MltiSystem, SystemJson, STABILITY_MARGIN};
