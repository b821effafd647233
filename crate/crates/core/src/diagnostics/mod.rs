//! Energy budget, equilibria and long-time diagnostics.

mod convergence;
mod energy;
mod steady;

pub use convergence::{
    convergence_monitor, dissipative_bound_check, fit_decay_exponent, phi, BoundCheck, ConvergenceOptions,
    ConvergenceReport, PowerLawFit, StrongReport, TrajectorySample,
};
pub use energy::{
    absorbing_norm, budget_flux, dissipation_components, energy_budget_residual, energy_record,
    equilibrium_residual, total_energy, EnergyRecord, ExtraNorm, NormField,
};
pub use steady::{gradient_flow_step, steady_state_solve, steady_state_solve_with, SteadyOptions, SteadyResult};
