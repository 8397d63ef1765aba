//! Conditional mixing ("Keplerian shear") of fiberwise translation flows.
//!
//! The crate implements translation flows on torus bundles and their
//! relatives, computes conditional covariances exactly (Fourier sums and
//! base quadrature) or by Monte Carlo, checks the critical-set criterion
//! for shear, fits decay rates, and counts lattice points near spheres.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod counterexamples;
pub mod covariance;
pub mod criterion;
pub mod error;
pub mod flows;
pub mod lattice;
pub mod observables;
pub mod quadrature;
pub mod rng;
pub mod stats;

pub use analysis::{
    check_geodesic_rate, check_transvection_bound, fit_exponential, fit_power_law, BoundCheck, DecayFit, ExponentialFit,
};
pub use counterexamples::{
    padic_covariance_series, padic_orbit_values, sphere_no_decay_certificate, PAdicCharacterObservable, PAdicInteger,
    SphereCertificate,
};
pub use covariance::{
    cov_series, mc_cov, spectral_cov_product_flow, spectral_cov_transvection, CovarianceSeries, Estimator,
};
pub use criterion::{criterion_report, sublevel_measure, CriterionReport, Verdict};
pub use error::{Result, ShearError};
pub use flows::{
    billiard_chart_velocity, sample_invariant, suspension_evolve, BaseChartPoint, BaseDensity, BaseManifold,
    BaseMapSpec, CompatibleFlow, FlowSpec, PhasePoint, TorusVector, TransvectionVariant, VelocityField,
};
pub use lattice::{count_ball, count_shell, shell_asymptotic, ShellCount, ShellQuery};
pub use observables::{
    aniso_weight, conditional_expectation, norm_h_s0, BaseProfile, CoefficientLaw, FourierObservable, FrequencyVector,
};
pub use quadrature::QuadSpec;
