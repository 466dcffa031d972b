//! Multiplier identity, coefficient positivity, the Hardy inequality and the
//! interior local-energy bound for walls at x₀ > 0.

mod audit;
mod bifurcation;
mod hardy;
mod ibp;
mod pair;
mod scan;

pub use audit::{le_bound_audit, le_bound_audit_exact, positive_ratio_exact, LeBoundAudit};
pub use bifurcation::{
    bifurcation, compact_bump, frequency_packet, BifurcationOptions, BifurcationReport, NegativeRow, PositiveRow,
};
pub use hardy::{
    hardy_check, hardy_corpus, wall_bump, HardyResult, HardySample, HARDY_CONSTANT, HARDY_CORPUS_SIZE, HARDY_SEED,
};
pub use ibp::{ibp_corpus, verify_ibp, IbpCase, IbpLevel, IbpOptions, IdentityReport, ManufacturedSolution, TimeShape};
pub use pair::{closed_form_coefficients, comparison_weights, Coefficients, MultiplierFamily, MultiplierPair};
pub use scan::{
    admissible_delta, coefficient_scan, log_samples, suite_delta, CoefficientScan, F_RANGE_SLACK, G_TIMES_A_BOUND,
    SUITE_RANGE, SUITE_SAMPLES,
};
