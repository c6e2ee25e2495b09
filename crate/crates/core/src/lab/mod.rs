//! Executable forms of the operator-difference identities and the Schatten
//! class Lipschitz experiments.

mod config;
mod experiment;
mod identity;

pub use config::{
    CheckKind, EnsembleConfig, ExperimentConfig, IndexList, Mode, Normalizer, Perturb,
    PerturbationConfig, ScanConfig, DEFAULT_RELATIVE_GAP,
};
pub use experiment::{
    lipschitz_experiment, normalizer_for, p_above_2_scan, DimSummary, ExperimentReport,
    LipschitzTrial, TrendSummary, GROWTH_SLOPE,
};
pub use identity::{
    difference_first_identity_check, difference_second_identity_check, first_check, full_check,
    full_difference_identity_check, identity_experiment, identity_instance, second_check,
    IdentityCheckReport, IdentityInstance, IdentityReport, Operator,
};
