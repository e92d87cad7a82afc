//! Phase relations: compressions, compound spectra, products, sums, rank
//! robustness and quasi-sectorial tensors. Each check builds the witness that
//! makes the relation tight and reports margins instead of a bare verdict.

mod compound;
mod compression;
mod quasi;
mod relations;
mod robustness;

pub use compound::{
    binomial, compound_membership_witness, compound_spectrum, quotient_containment_check, CompoundSpectrum,
    MembershipWitness, QuotientEntry, QuotientReport, MAX_SUBSETS,
};
pub use compression::{check_interlacing, compress, sum_phase_extremes_check, InterlacingReport, SumExtremesReport};
pub use quasi::{
    quasi_blocked_decomposition, quasi_inequality_check, quasi_phases, QuasiBlocked, QuasiInequality, KERNEL_TOL,
};
pub use relations::{cone_closure_check, majorization_check, ConeClosureReport, ConeSpec, MajorizationReport};
pub use robustness::{
    random_cone_member, rank_drop, rank_robustness_threshold, worst_case_b, RankDrop, RANK_DROP_TOL,
};

/// Slack allowed on phase inequalities.
pub const CHECK_TOL: f64 = 1e-6;
/// Relative error allowed when a witness reproduces a spectral value.
pub const WITNESS_TOL: f64 = 1e-6;
