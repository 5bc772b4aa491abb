//! Monte Carlo estimates of expected reconstruction errors and their rate
//! in `eta = sigma n^{-1/2}`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::noise::{standard_normals, NoiseModel};
use super::problem::Problem;
use super::stats::{mean, pairwise_sum};
use crate::design::SampleDesign;
use crate::error::{Error, Result};
use crate::param::{a_priori_alpha, adaptive_alpha_with, AdaptiveOptions, PriorRuleInputs};
use crate::regression::{fit_loglog, LogLogFit};
use crate::spectral::SpectralSystem;
use crate::tikhonov::{Discretization, SpdFactor};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorMeasure {
    /// `|K x - K x^dagger|_n^2`.
    Empirical,
    /// `||x - x^dagger||_{W*}^2`.
    WStar,
    /// `||x - x^dagger||^2`.
    L2,
}

impl ErrorMeasure {
    pub fn as_str(&self) -> &'static str {
        match self {
            ErrorMeasure::Empirical => "empirical",
            ErrorMeasure::WStar => "wstar",
            ErrorMeasure::L2 => "l2",
        }
    }

    /// Power of `||x^dagger||` the expected error is divided by.
    pub fn normalization_exponent(&self, m: u32) -> f64 {
        let m = f64::from(m);
        match self {
            ErrorMeasure::Empirical => 2.0 / (1.0 + 2.0 * m),
            ErrorMeasure::WStar => (2.0 + 2.0 * m) / (1.0 + 2.0 * m),
            ErrorMeasure::L2 => 2.0,
        }
    }

    /// Predicted exponent of `eta` under the a priori rule, where one exists.
    pub fn theory_slope(&self, m: u32) -> Option<f64> {
        let m = f64::from(m);
        match self {
            ErrorMeasure::Empirical => Some(4.0 * m / (1.0 + 2.0 * m)),
            ErrorMeasure::WStar => Some(2.0 * m / (1.0 + 2.0 * m)),
            ErrorMeasure::L2 => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaRule {
    APriori { c: f64 },
    Adaptive { c: f64, tol: f64, max_iter: usize },
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseLevel {
    /// Relative level `delta`; `sigma = delta ||K x^dagger||_inf`.
    Relative(f64),
    Absolute(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    pub trials: usize,
    pub base_seed: u64,
    pub n_grid: Vec<usize>,
    pub noise_grid: Vec<NoiseLevel>,
    pub measure: ErrorMeasure,
    pub alpha_rule: AlphaRule,
    /// Terms kept in the dual-space norm.
    pub truncation: usize,
}

impl McConfig {
    /// Reduced desk-scale grids: `n` up to 20000, four relative noise levels,
    /// 500 trials, a priori parameter with `C = 1`.
    pub fn desk_scale(measure: ErrorMeasure) -> Self {
        Self {
            trials: 500,
            base_seed: 20_251_015,
            n_grid: vec![2500, 5000, 10_000, 20_000],
            noise_grid: [0.005, 0.01, 0.05, 0.1]
                .into_iter()
                .map(NoiseLevel::Relative)
                .collect(),
            measure,
            alpha_rule: AlphaRule::APriori { c: 1.0 },
            truncation: SpectralSystem::DEFAULT_TRUNCATION,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::parameter("trials", "must be at least 1"));
        }
        if self.n_grid.is_empty() || self.noise_grid.is_empty() {
            return Err(Error::Config("sample and noise grids must be non-empty".into()));
        }
        if let Some(n) = self.n_grid.iter().find(|&&n| n < 2) {
            return Err(Error::parameter("n", format!("every sample count must be >= 2, got {n}")));
        }
        for level in &self.noise_grid {
            let v = match level {
                NoiseLevel::Relative(v) | NoiseLevel::Absolute(v) => *v,
            };
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::parameter("noise", format!("levels must be non-negative, got {v}")));
            }
        }
        match self.alpha_rule {
            AlphaRule::Fixed(a) if !(a.is_finite() && a > 0.0) => {
                return Err(Error::parameter("alpha", format!("must be positive, got {a}")));
            }
            AlphaRule::APriori { c } | AlphaRule::Adaptive { c, .. } if !(c.is_finite() && c > 0.0) => {
                return Err(Error::parameter("c", format!("must be positive, got {c}")));
            }
            _ => {}
        }
        if self.measure == ErrorMeasure::WStar && self.truncation == 0 {
            return Err(Error::parameter("truncation", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub n: usize,
    pub sigma: f64,
    pub eta: f64,
    /// Parameter used (mean over trials for the adaptive rule).
    pub alpha: f64,
    pub mean_sq_error: f64,
    /// `mean_sq_error / ||x^dagger||^p`.
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateResult {
    pub measure: ErrorMeasure,
    /// Sorted by `eta`.
    pub points: Vec<RatePoint>,
    /// `None` when fewer than two distinct `eta` values are available.
    pub fit: Option<LogLogFit>,
    pub normalization_exponent: f64,
    pub theory_slope: Option<f64>,
}

/// Per-`n` data shared by every noise level.
struct DesignContext {
    disc: Discretization,
    exact: Vec<f64>,
    b_exact: DVector<f64>,
    sup_norm: f64,
    projections: Option<(DMatrix<f64>, Vec<f64>)>,
}

/// Estimates `E[error^2]` on every `(n, noise)` pair and fits the log-log
/// rate against `eta`.
pub fn mc_error_expectation(cfg: &McConfig, problem: &Problem) -> Result<RateResult> {
    cfg.validate()?;
    let m = problem.kernel.smoothness();
    let xdag_norm = problem.xdag_norm();
    let p = cfg.measure.normalization_exponent(m);
    // A zero ground truth leaves the errors unnormalized.
    let scale = if xdag_norm > 0.0 { xdag_norm.powf(p) } else { 1.0 };
    let spectral = match cfg.measure {
        ErrorMeasure::WStar => Some(SpectralSystem::green_sine(cfg.truncation)?),
        _ => None,
    };
    let truth_proj = match &spectral {
        Some(sys) => {
            let t = &problem.truth;
            Some(sys.project_function(|s| t.eval(s), t.breakpoints(), 4 * problem.space.num_elements())?)
        }
        None => None,
    };

    let mut points = Vec::with_capacity(cfg.n_grid.len() * cfg.noise_grid.len());
    for &n in &cfg.n_grid {
        let (a, b) = problem.kernel.domain();
        let design = SampleDesign::uniform(n, a, b)?;
        let disc = Discretization::new(&problem.kernel, &problem.space, &design, &problem.quad)?;
        let exact = problem.exact_data(design.points())?;
        let b_exact = disc.rhs(&exact)?;
        let needs_sup = cfg.noise_grid.iter().any(|l| matches!(l, NoiseLevel::Relative(_)));
        let sup_norm = if needs_sup { problem.data_sup_norm(n)? } else { 0.0 };
        let projections = match (&spectral, &truth_proj) {
            (Some(sys), Some(tp)) => Some((sys.hat_projection_matrix(&problem.space)?, tp.clone())),
            _ => None,
        };
        let ctx = DesignContext {
            disc,
            exact,
            b_exact,
            sup_norm,
            projections,
        };
        for level in &cfg.noise_grid {
            let model = match *level {
                NoiseLevel::Relative(d) => NoiseModel::relative(d, ctx.sup_norm)?,
                NoiseLevel::Absolute(s) => NoiseModel::gaussian(s)?,
            };
            let (alpha, mse) = run_point(cfg, problem, &ctx, &spectral, &model, xdag_norm)?;
            let sigma = model.sigma();
            points.push(RatePoint {
                n,
                sigma,
                eta: sigma / (n as f64).sqrt(),
                alpha,
                mean_sq_error: mse,
                normalized: mse / scale,
            });
        }
    }
    points.sort_by(|x, y| x.eta.total_cmp(&y.eta));

    let usable: Vec<&RatePoint> = points
        .iter()
        .filter(|pt| pt.eta > 0.0 && pt.mean_sq_error > 0.0)
        .collect();
    let mut etas: Vec<f64> = usable.iter().map(|pt| pt.eta).collect();
    etas.dedup();
    let fit = if etas.len() >= 2 {
        let xs: Vec<f64> = usable.iter().map(|pt| pt.eta).collect();
        // Fit the raw errors and move the normalization into the intercept,
        // so the slope does not depend on it even in the last bit.
        let ys: Vec<f64> = usable.iter().map(|pt| pt.mean_sq_error).collect();
        let mut fit = fit_loglog(&xs, &ys)?;
        fit.intercept -= scale.ln();
        Some(fit)
    } else {
        None
    };

    Ok(RateResult {
        measure: cfg.measure,
        points,
        fit,
        normalization_exponent: p,
        theory_slope: cfg.measure.theory_slope(m),
    })
}

fn run_point(
    cfg: &McConfig,
    problem: &Problem,
    ctx: &DesignContext,
    spectral: &Option<SpectralSystem>,
    model: &NoiseModel,
    xdag_norm: f64,
) -> Result<(f64, f64)> {
    let n = ctx.disc.n();
    let m = problem.kernel.smoothness();
    let sigma = model.sigma();
    let fixed_alpha = match cfg.alpha_rule {
        AlphaRule::Fixed(a) => Some(a),
        AlphaRule::APriori { c } => Some(a_priori_alpha(
            &PriorRuleInputs::new(sigma, n, xdag_norm, m).with_constant(c),
        )?),
        AlphaRule::Adaptive { .. } => None,
    };
    let factor = fixed_alpha.map(|a| ctx.disc.factor(a)).transpose()?;

    let trial = |t: usize| -> Result<(f64, f64)> {
        let z = if sigma == 0.0 {
            vec![0.0; n]
        } else {
            standard_normals(n, cfg.base_seed, t as u64)
        };
        let w: Vec<f64> = ctx.exact.iter().zip(&z).map(|(y, e)| y + sigma * e).collect();
        let (alpha, coeffs) = match (&factor, fixed_alpha) {
            (Some(f), Some(a)) => {
                let zb = ctx.disc.rhs(&z)?;
                let b = &ctx.b_exact + zb * sigma;
                (a, f.solve(&b)?)
            }
            _ => {
                let AlphaRule::Adaptive { c, tol, max_iter } = cfg.alpha_rule else {
                    unreachable!("non-adaptive rules always have a factor")
                };
                let opts = AdaptiveOptions {
                    m,
                    c,
                    alpha0: crate::param::default_alpha0(n, m)?,
                    tol,
                    max_iter,
                };
                let trace = adaptive_alpha_with(&ctx.disc, &w, &opts)?;
                let f: SpdFactor = ctx.disc.factor(trace.alpha_final)?;
                (trace.alpha_final, f.solve(&ctx.disc.rhs(&w)?)?)
            }
        };
        let err = measure_error(cfg.measure, problem, ctx, spectral, coeffs.as_slice())?;
        Ok((alpha, err))
    };

    let results: Vec<(f64, f64)> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            trial(t).map_err(|source| Error::Trial {
                trial: t as u64,
                seed: cfg.base_seed,
                source: Box::new(source),
            })
        })
        .collect::<Result<_>>()?;
    let alphas: Vec<f64> = results.iter().map(|r| r.0).collect();
    let errors: Vec<f64> = results.iter().map(|r| r.1).collect();
    Ok((mean(&alphas), pairwise_sum(&errors) / errors.len() as f64))
}

fn measure_error(
    measure: ErrorMeasure,
    problem: &Problem,
    ctx: &DesignContext,
    spectral: &Option<SpectralSystem>,
    coeffs: &[f64],
) -> Result<f64> {
    match measure {
        ErrorMeasure::Empirical => {
            let kx = ctx.disc.apply(coeffs)?;
            let sq: Vec<f64> = kx.iter().zip(&ctx.exact).map(|(a, b)| (a - b) * (a - b)).collect();
            Ok(pairwise_sum(&sq) / sq.len() as f64)
        }
        ErrorMeasure::WStar => {
            let (p, truth) = ctx.projections.as_ref().expect("projections built for W*");
            let sys = spectral.as_ref().expect("spectral system built for W*");
            let u = p * DVector::from_column_slice(coeffs);
            let diff: Vec<f64> = u.iter().zip(truth).map(|(a, b)| a - b).collect();
            Ok(sys.weighted_norm(&diff)?.powi(2))
        }
        ErrorMeasure::L2 => {
            let x = problem.space.function(coeffs.to_vec())?;
            Ok(problem.l2_error(&x).powi(2))
        }
    }
}
