//! Two-mode cross-Kerr dynamics with Markovian loss and dephasing.
//!
//! The crate provides closed-form solutions for coherent inputs
//! ([`analytic`]), a brute-force master-equation integrator used as an
//! independent reference ([`oracle`]), correlated-reservoir tools
//! ([`correlated`]) and phase-space/entanglement observables
//! ([`observables`]).
//!
//! A two-mode density matrix `ρ[k,l;m,n] = ⟨k,m|ρ|l,n⟩` is stored as a dense
//! `(d², d²)` matrix with row `k·d + m` and column `l·d + n`, where
//! `d = n_max + 1`.

pub mod analytic;
pub mod correlated;
pub mod error;
pub mod fock;
pub mod observables;
pub mod oracle;
pub mod sparse;

pub use analytic::{
    evolve_exact, evolve_exact_unnormalized, f_function, lambda_system_rates, long_time_state, purity_exact,
    short_time_state, single_mode_decay, KerrLossParams, LambdaRates, ValidityReport,
};
pub use correlated::{
    beamsplit_decoherence_evolve, conditioned_cat, correlated_cat_asymptotic, evolve_rotated_frame, from_rotated_frame,
    lossless_cat_reference, negativity_trace, rotation_frame, to_rotated_frame, CatReference, ConditionedCat,
    RotationFrame,
};
pub use error::{KerrError, Result};
pub use fock::{
    coherent_density, partial_trace, purity, tensor_product, validate, CoherentAmplitude, DensityOperator,
    Diagnostics, FockCutoff, ModeIndex, SingleModeDensity, TwoModeDensity,
};
pub use num_complex::Complex64 as C64;
pub use observables::{
    bs_half_loss_wigner, min_wigner, negativity, project_quadrature, q_function, wigner, PhaseSpaceGrid,
    QuadratureOutcome, ScalarField, TimeSeries, WignerMinimum,
};
pub use oracle::{
    build_collective_generator, build_cross_kerr_generator, coherent_pair_reference, integrate, steady_state_probe, JumpTerm,
    LindbladGenerator, SteadyState,
};
