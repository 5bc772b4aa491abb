//! Synthetic experiments: noise generation, Monte Carlo rate estimation and
//! tail diagnostics.

pub mod mc;
pub mod noise;
pub mod problem;
pub mod stats;
pub mod tails;

pub use crate::design::make_design;
pub use crate::regression::{fit_loglog, LogLogFit};
pub use mc::{mc_error_expectation, AlphaRule, ErrorMeasure, McConfig, NoiseLevel, RatePoint, RateResult};
pub use noise::{gen_noise, trial_noise, trial_rng, NoiseModel};
pub use problem::{Problem, TrueSolution};
pub use tails::{qq_points, tail_experiment, Histogram, TailResult, MIN_TAIL_TRIALS};
