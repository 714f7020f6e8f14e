//! Splitting integrators for Hamiltonian Monte Carlo, analysed and tuned
//! through their exact action on the harmonic oscillator.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod harmonic;
pub mod hmc;
pub mod numeric;
pub mod optimize;
pub mod schemes;
pub mod targets;

pub use error::{Error, Result};
pub use harmonic::{
    diagnostics, error_constants, harmonic_update, rho_bound_multivariate,
    rho_closed_form_two_stage, rho_norm, rho_norm_with_grid, stability_interval, ErrorConstants,
    HarmonicDiagnostics, HarmonicUpdate,
};
pub use optimize::{
    minimize_error_metric_two_stage, optimize_four_stage, optimize_four_stage_with_b1,
    optimize_three_stage, optimize_two_stage, solve_double_root_three_stage, ErrorMetric, Family,
    OptimizationReport,
};
pub use schemes::{
    catalog, concatenate, make_four_stage, make_three_stage, make_three_stage_from_hhat,
    make_two_stage, Branch, Flow, LeadingKind, SplittingScheme, CATALOG_NAMES,
};
pub use hmc::{
    energy_flip_check, expected_energy_error_harmonic, expected_energy_error_jittered, hmc_run,
    integrate, reversibility_check, run_replicas, volume_check, ChainSummary, HmcConfig,
    Integrator, Start, StepRecord,
};
pub use targets::{diagonal_gaussian, double_well, gaussian_chain, standard_gaussian, Target};
