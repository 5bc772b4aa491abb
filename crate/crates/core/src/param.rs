//! Regularization parameter choice: the a priori power rule and the
//! adaptive self-consistent iteration that estimates its unknowns from data.
//!
//! Both rules set `alpha^{1/2 + 1/(4m)} = C sigma n^{-1/2} / rho`, i.e.
//! `alpha = (C sigma n^{-1/2} / rho)^{4m/(2m+1)}`. The a priori rule uses
//! the true noise level and `rho = ||x^dagger|| + sigma n^{-1/2}`; the
//! adaptive rule replaces `sigma` by the discrepancy `d` and `||x^dagger||`
//! by the current reconstruction norm.

use crate::design::Observation;
use crate::error::{Error, Result};
use crate::fem::FemSpace;
use crate::kernel::Kernel;
use crate::quadrature::QuadratureRule;
use crate::tikhonov::{Discretization, RegularizedSolution};

/// `4m / (2m + 1)`, the reciprocal of `1/2 + 1/(4m)`, formed from integers.
pub fn rule_exponent(m: u32) -> f64 {
    f64::from(4 * m) / f64::from(2 * m + 1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorRuleInputs {
    /// Noise standard deviation.
    pub sigma: f64,
    pub n: usize,
    /// `||x^dagger||` or an estimate of it.
    pub xdag_norm: f64,
    /// Smoothness index of the operator's range.
    pub m: u32,
    /// Multiplier for the hidden constant in the rule.
    pub c: f64,
}

impl PriorRuleInputs {
    pub fn new(sigma: f64, n: usize, xdag_norm: f64, m: u32) -> Self {
        Self {
            sigma,
            n,
            xdag_norm,
            m,
            c: 1.0,
        }
    }

    pub fn with_constant(mut self, c: f64) -> Self {
        self.c = c;
        self
    }
}

/// `alpha = (C sigma n^{-1/2} / (||x^dagger|| + sigma n^{-1/2}))^{4m/(2m+1)}`.
pub fn a_priori_alpha(inp: &PriorRuleInputs) -> Result<f64> {
    if inp.n == 0 {
        return Err(Error::parameter("n", "must be at least 1"));
    }
    if inp.m == 0 {
        return Err(Error::parameter("m", "must be at least 1"));
    }
    if !(inp.c.is_finite() && inp.c > 0.0) {
        return Err(Error::parameter("c", format!("must be positive, got {}", inp.c)));
    }
    if !(inp.sigma.is_finite() && inp.sigma >= 0.0) {
        return Err(Error::parameter("sigma", format!("must be non-negative, got {}", inp.sigma)));
    }
    if !(inp.xdag_norm.is_finite() && inp.xdag_norm >= 0.0) {
        return Err(Error::parameter(
            "xdag_norm",
            format!("must be non-negative, got {}", inp.xdag_norm),
        ));
    }
    if inp.sigma == 0.0 && inp.xdag_norm == 0.0 {
        return Err(Error::Degenerate("noise level and solution norm are both zero".into()));
    }
    let eta = inp.sigma / (inp.n as f64).sqrt();
    let ratio = inp.c * eta / (inp.xdag_norm + eta);
    Ok(ratio.powf(rule_exponent(inp.m)))
}

/// `n^{-2m/(2m+1)}`: a starting value needing neither sigma nor `||x^dagger||`.
pub fn default_alpha0(n: usize, m: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::parameter("n", "must be at least 1"));
    }
    if m == 0 {
        return Err(Error::parameter("m", "must be at least 1"));
    }
    Ok((n as f64).powf(-f64::from(2 * m) / f64::from(2 * m + 1)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Tolerance,
    MaxIter,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::Tolerance => "tolerance",
            StopReason::MaxIter => "max_iter",
        }
    }
}

/// One pass of the adaptive iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub alpha: f64,
    /// `d = |K x - w|_n`.
    pub discrepancy: f64,
    /// `N = ||x|| + n^{-1/2} d`.
    pub norm_estimate: f64,
    pub solution_norm: f64,
    /// Parameter produced by this pass's update.
    pub next_alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaTrace {
    pub iterations: Vec<IterationRecord>,
    pub converged: bool,
    pub stop_reason: StopReason,
    pub alpha_final: f64,
}

impl AlphaTrace {
    /// `alpha^(0), alpha^(1), ...` including the final update.
    pub fn alphas(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.iterations.iter().map(|r| r.alpha).collect();
        if let Some(last) = self.iterations.last() {
            out.push(last.next_alpha);
        }
        out
    }

    /// Whether `alpha^(k+1) - alpha^(k)` keeps one sign for `k >= start`.
    pub fn is_monotone_from(&self, start: usize) -> bool {
        let alphas = self.alphas();
        if alphas.len() <= start + 1 {
            return true;
        }
        let tail = &alphas[start..];
        let inc = tail.windows(2).all(|w| w[1] >= w[0]);
        let dec = tail.windows(2).all(|w| w[1] <= w[0]);
        inc || dec
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOptions {
    pub m: u32,
    pub c: f64,
    pub alpha0: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl AdaptiveOptions {
    /// `C = 1`, `tol = 1e-3`, at most 15 passes, `alpha0 = n^{-2m/(2m+1)}`.
    pub fn defaults(n: usize, m: u32) -> Result<Self> {
        Ok(Self {
            m,
            c: 1.0,
            alpha0: default_alpha0(n, m)?,
            tol: 1e-3,
            max_iter: 15,
        })
    }

    fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::parameter("m", "must be at least 1"));
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::parameter("c", format!("must be positive, got {}", self.c)));
        }
        if !(self.alpha0.is_finite() && self.alpha0 > 0.0) {
            return Err(Error::parameter("alpha0", format!("must be positive, got {}", self.alpha0)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::parameter("tol", format!("must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::parameter("max_iter", "must be at least 1"));
        }
        Ok(())
    }
}

/// One update of the adaptive rule from a discrepancy and solution norm.
pub fn adaptive_update(discrepancy: f64, solution_norm: f64, n: usize, m: u32, c: f64) -> f64 {
    let root_n = (n as f64).sqrt();
    let norm_estimate = solution_norm + discrepancy / root_n;
    (c * discrepancy / (root_n * norm_estimate)).powf(rule_exponent(m))
}

/// Runs the adaptive iteration on a prepared discretization.
pub fn adaptive_alpha_with(
    disc: &Discretization,
    w: &[f64],
    opts: &AdaptiveOptions,
) -> Result<AlphaTrace> {
    opts.validate()?;
    let n = disc.n();
    let root_n = (n as f64).sqrt();
    let exponent = rule_exponent(opts.m);
    let mut trace = AlphaTrace {
        iterations: Vec::with_capacity(opts.max_iter),
        converged: false,
        stop_reason: StopReason::MaxIter,
        alpha_final: opts.alpha0,
    };
    let mut alpha = opts.alpha0;
    for k in 0..opts.max_iter {
        let sol = match disc.solve(w, alpha) {
            Ok(s) => s,
            Err(source) => {
                return Err(Error::Adaptive {
                    trace: Box::new(trace),
                    source: Box::new(source),
                })
            }
        };
        let d = sol.discrepancy;
        let norm_estimate = sol.solution_norm + d / root_n;
        if d == 0.0 || norm_estimate == 0.0 {
            // Exact fit: the update would drive alpha to zero.
            trace.iterations.push(IterationRecord {
                k,
                alpha,
                discrepancy: d,
                norm_estimate,
                solution_norm: sol.solution_norm,
                next_alpha: alpha,
            });
            trace.converged = true;
            trace.stop_reason = StopReason::Tolerance;
            trace.alpha_final = alpha;
            return Ok(trace);
        }
        let next = (opts.c * d / (root_n * norm_estimate)).powf(exponent);
        trace.iterations.push(IterationRecord {
            k,
            alpha,
            discrepancy: d,
            norm_estimate,
            solution_norm: sol.solution_norm,
            next_alpha: next,
        });
        trace.alpha_final = next;
        if ((alpha - next) / next).abs() < opts.tol {
            trace.converged = true;
            trace.stop_reason = StopReason::Tolerance;
            return Ok(trace);
        }
        alpha = next;
    }
    Ok(trace)
}

/// Adaptive iteration followed by a final solve at the selected parameter.
pub fn adaptive_solve(
    disc: &Discretization,
    w: &[f64],
    opts: &AdaptiveOptions,
) -> Result<(AlphaTrace, RegularizedSolution)> {
    let trace = adaptive_alpha_with(disc, w, opts)?;
    let sol = disc.solve(w, trace.alpha_final)?;
    Ok((trace, sol))
}

/// Builds the discretization with the default quadrature and runs the
/// adaptive iteration.
#[allow(clippy::too_many_arguments)]
pub fn adaptive_alpha(
    kernel: &Kernel,
    space: &FemSpace,
    obs: &Observation<'_>,
    m: u32,
    c: f64,
    alpha0: f64,
    tol: f64,
    max_iter: usize,
) -> Result<AlphaTrace> {
    let opts = AdaptiveOptions {
        m,
        c,
        alpha0,
        tol,
        max_iter,
    };
    opts.validate()?;
    let disc = Discretization::new(kernel, space, obs.design(), &QuadratureRule::default())?;
    adaptive_alpha_with(&disc, obs.values(), &opts)
}
