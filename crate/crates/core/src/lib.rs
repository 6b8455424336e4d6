//! Gravitational-background hidden-variable model of EPR/Bell correlations.
//!
//! A random, isotropic background of weak gravitational waves acts as the
//! hidden variable. [`geometry`] builds the plane-wave metric perturbations,
//! [`background`] samples ensembles of them, [`oscillator`] integrates the
//! relative motion they induce in a particle pair, and [`correlation`]
//! turns the planar hidden direction into analyzer correlations and the
//! Bell observable `S`.

pub mod background;
pub mod correlation;
pub mod error;
pub mod geometry;
pub mod numeric;
pub mod oscillator;
pub mod rng;
pub mod stats;

pub use background::{
    heisenberg_diagnostic, mode_phase, sample_ensemble, sample_lambda, BackgroundEnsemble, BackgroundMode,
    HeisenbergDiagnostic, HiddenVariable, SpectrumConfig,
};
pub use correlation::{
    bell_s, check_bounds, correlation_closed_form, correlation_monte_carlo, correlation_quadrature,
    correlation_sign_model, sweep_s, AnalyzerConfig, BoundReport, ChshResult, CorrelationEstimate, Correlator, Method,
};
pub use error::{Error, Result};
pub use geometry::{
    metric_at, perturbation_at, riemann_0101, scalar_product, FourVector, MetricPerturbation, MetricSignature,
    SymTensor4,
};
pub use oscillator::{
    analytic_solution, integrate_background, integrate_deviation, omega_from_riemann, superpose_background,
    DeviationState, SpatialExponent, Trajectory,
};

/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Version string embedded in every exported artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
