//! Sampled Tikhonov regularization for first-kind Fredholm integral
//! equations
//!
//! ```text
//! (K x)(s) = int_a^b k(s, t) x(t) dt = y(s)
//! ```
//!
//! observed only at scattered points `s_1 < ... < s_n` with additive noise.
//! The reconstruction minimizes `|K x - w|_n^2 + alpha ||x||^2` over
//! continuous piecewise-linear finite elements, where `|.|_n` is the
//! root-mean-square over the samples.
//!
//! Modules:
//! - [`kernel`], [`quadrature`], [`operator`]: kernels and the sampled operator matrix
//! - [`fem`]: P1 elements, mass matrix, interpolation
//! - [`tikhonov`]: assembly and solution of the regularized normal equations
//! - [`param`]: a priori and adaptive choice of `alpha`
//! - [`spectral`]: operator spectra, decay fits and the dual-space norm
//! - [`lab`]: seeded noise, Monte Carlo rates and tail experiments

// `!(x > 0.0)` also rejects NaN, which `x <= 0.0` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod design;
pub mod error;
pub mod fem;
pub mod kernel;
pub mod lab;
pub mod operator;
pub mod param;
pub mod quadrature;
pub mod regression;
pub mod spectral;
pub mod tikhonov;

pub use design::{make_design, Observation, SampleDesign};
pub use error::{Error, Result};
pub use fem::{FemFunction, FemSpace, MassMatrix};
pub use kernel::{eval_kernel, Kernel, KernelKind};
pub use operator::{apply_operator, operator_matrix};
pub use param::{
    a_priori_alpha, adaptive_alpha, adaptive_alpha_with, adaptive_solve, default_alpha0,
    AdaptiveOptions, AlphaTrace, IterationRecord, PriorRuleInputs, StopReason,
};
pub use quadrature::QuadratureRule;
pub use regression::{fit_loglog, LogLogFit};
pub use spectral::{
    fit_decay, quadrature_operator_matrix, spectrum, wstar_norm, DecayFit, SpectralSystem,
};
pub use tikhonov::{
    assemble, empirical_seminorm, energy_norm, solve, solve_regularized, Discretization,
    RegularizedSolution,
};
