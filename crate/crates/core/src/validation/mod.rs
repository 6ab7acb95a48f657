//! Quantitative verification: residual computation and scaling, error-vs-
//! approximation studies, the normal-form kernels with their defining
//! identities, and the modified energy with its equivalence check.

pub mod energy;
pub mod kernels;
pub mod residual;
pub mod studies;

pub use energy::{
    decompose_error, energy_equivalence_check, modified_energy, EnergyBreakdown,
    EnergyEquivalenceStats, ErrorDecomposition,
};
pub use kernels::{KernelContext, SignPair};
pub use residual::{residual_fields, residual_norms};
pub use studies::{
    convergence_study, error_vs_approximation, fit_power_law, residual_scaling_study,
    ConvergencePoint, ConvergenceReport, ErrorSeries, ResidualScaling, Scenario,
};
