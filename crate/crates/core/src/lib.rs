//! Exact non-Markovian decoherence of a single bosonic mode coupled to a
//! zero-temperature harmonic bath.
//!
//! The reduced dynamics is fixed by one complex amplitude `u(t)` obeying a
//! Volterra integro-differential equation with the bath memory kernel.
//! From it follow the time-dependent decay rate and shifted frequency of
//! the master equation and the evolution of Schrödinger-cat states.

pub mod cat;
pub mod oracle;
pub mod plot;
pub mod quadrature;
pub mod rates;
pub mod scenario;
pub mod solver;
pub mod spectral;
pub mod validation;

pub use cat::{evolve_cat, propagate_dyad, purity, CatState, EvolvedCat};
pub use oracle::{
    discretize_bath, fock_master_propagation, oracle_amplitude, DiscreteBath, FockDensity,
    OracleError, SamplingScheme,
};
pub use rates::{extract_rates, CoefficientSeries, DEFAULT_EPSILON_U};
pub use solver::{
    convergence_study, default_dt, markovian_u, solve_u, AmplitudeSeries, ConvergenceReport,
    SolverError, TimeGrid,
};
pub use spectral::{
    kernel_closed_form, kernel_quadrature, markovian_coefficients, pv_integral, spectral_density,
    BathClass, BathMode, Kernel, MarkovianCoefficients, QuadratureConfig, SpectralError,
    SpectralParams,
};
