//! Spectral action on the noncommutative torus: cutoff moments, heat traces,
//! large-Λ fits and the noncommutative integrals entering the constant term.

mod dense;
mod heat;
mod lattice;
mod nc;
mod profile;
mod spectral;

pub use dense::{window_radius, window_trace, TraceMethod, WindowOptions, WindowTrace};
pub use heat::{
    correction_probe, correction_scaling, free_heat_trace, heat_trace, log_grid,
    twisted_heat_trace, twisted_lattice_sum, twisted_terms, CorrectionOptions, CorrectionPoint,
    CorrectionRegime, CorrectionRow, HeatSample,
};
pub use lattice::{
    gaussian_lattice_sum, radial_lattice_sum, shell_counts, sphere_volume, SHELL_LIMIT,
};
pub use nc::{
    constant_term, default_order, diophantine_certified, nc_integral_power, tau_ff, ConstantTerm,
    NcIntegral, NcOptions, CERTIFY_QMAX,
};
pub use profile::CutoffProfile;
pub use spectral::{
    action_samples, cosmological_term, fit_expansion, spectral_action, ActionValue,
    CosmologicalTerm, ExpansionFit, FitCoefficient, MAX_CONDITION,
};
