//! Ground-truth test problems.

use std::fmt;
use std::sync::Arc;

use crate::error::Result;
use crate::fem::{FemFunction, FemSpace};
use crate::kernel::Kernel;
use crate::operator::apply_to_function;
use crate::quadrature::QuadratureRule;

type RealFn = dyn Fn(f64) -> f64 + Send + Sync;

/// A known solution `x^dagger` with its discontinuity locations.
#[derive(Clone)]
pub struct TrueSolution {
    name: String,
    f: Arc<RealFn>,
    breakpoints: Vec<f64>,
}

impl fmt::Debug for TrueSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TrueSolution")
            .field("name", &self.name)
            .field("breakpoints", &self.breakpoints)
            .finish()
    }
}

impl TrueSolution {
    pub fn new<F>(name: impl Into<String>, f: F, breakpoints: Vec<f64>) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            f: Arc::new(f),
            breakpoints,
        }
    }

    /// `-6 t^2 (1 - t)(2 - 8t + 7t^2)`, which vanishes at both ends.
    pub fn quintic() -> Self {
        Self::new(
            "quintic",
            |t| -6.0 * t * t * (1.0 - t) * (2.0 - 8.0 * t + 7.0 * t * t),
            vec![],
        )
    }

    /// 0 on `[0, 1/2]`, 1 on `(1/2, 1]`.
    pub fn step() -> Self {
        Self::new("step", |t| if t > 0.5 { 1.0 } else { 0.0 }, vec![0.5])
    }

    pub fn zero() -> Self {
        Self::new("zero", |_| 0.0, vec![])
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "quintic" => Some(Self::quintic()),
            "step" => Some(Self::step()),
            "zero" => Some(Self::zero()),
            _ => None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }
}

/// Kernel, mesh and ground truth for a synthetic experiment.
#[derive(Debug, Clone)]
pub struct Problem {
    pub kernel: Kernel,
    pub space: FemSpace,
    pub truth: TrueSolution,
    pub quad: QuadratureRule,
}

/// Panels used when integrating the exact solution against the kernel.
const TRUTH_PANELS: usize = 16;
const TRUTH_ORDER: usize = 8;

impl Problem {
    pub fn new(kernel: Kernel, space: FemSpace, truth: TrueSolution) -> Self {
        Self {
            kernel,
            space,
            truth,
            quad: QuadratureRule::default(),
        }
    }

    fn fine_rule() -> QuadratureRule {
        QuadratureRule::gauss_legendre(TRUTH_ORDER).expect("valid order")
    }

    /// `||x^dagger||_{L^2}`.
    pub fn xdag_norm(&self) -> f64 {
        let (a, b) = self.kernel.domain();
        let t = &self.truth;
        Self::fine_rule()
            .integrate_composite(a, b, 4 * TRUTH_PANELS, t.breakpoints(), |s| t.eval(s).powi(2))
            .sqrt()
    }

    /// Noise-free data `(K x^dagger)(s)` at each point.
    pub fn exact_data(&self, points: &[f64]) -> Result<Vec<f64>> {
        let t = self.truth.clone();
        apply_to_function(
            &self.kernel,
            move |s| t.eval(s),
            self.truth.breakpoints(),
            points,
            &Self::fine_rule(),
            TRUTH_PANELS,
        )
    }

    /// `||K x^dagger||_{L^inf}` estimated as the maximum over a uniform grid
    /// ten times finer than an `n`-point design.
    pub fn data_sup_norm(&self, n: usize) -> Result<f64> {
        let (a, b) = self.kernel.domain();
        let m = 10 * n.max(2).saturating_sub(1) + 1;
        let grid: Vec<f64> = (0..m)
            .map(|i| if i + 1 == m { b } else { a + (b - a) * i as f64 / (m - 1) as f64 })
            .collect();
        Ok(self
            .exact_data(&grid)?
            .into_iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs())))
    }

    /// `||x - x^dagger|| / ||x^dagger||`, integrated on each element with
    /// four sub-panels.
    pub fn relative_l2_error(&self, x: &FemFunction) -> f64 {
        let t = &self.truth;
        let err = x.l2_distance(|s| t.eval(s), t.breakpoints(), 4, &Self::fine_rule());
        err / self.xdag_norm()
    }

    /// `||x - x^dagger||_{L^2}`.
    pub fn l2_error(&self, x: &FemFunction) -> f64 {
        let t = &self.truth;
        x.l2_distance(|s| t.eval(s), t.breakpoints(), 4, &Self::fine_rule())
    }

    pub fn interpolant(&self) -> Result<FemFunction> {
        self.space.interpolate(|s| self.truth.eval(s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quintic_norms() {
        let p = Problem::new(Kernel::green(), FemSpace::unit_default(), TrueSolution::quintic());
        assert!((p.xdag_norm() - 0.144_149_994_031_289_4).abs() < 1e-12);
        let sup = p.data_sup_norm(1000).unwrap();
        assert!((sup - 8.39e-3).abs() < 5e-6, "{sup}");
    }

    #[test]
    fn step_norms() {
        let p = Problem::new(Kernel::green(), FemSpace::unit_default(), TrueSolution::step());
        assert!((p.xdag_norm() - 0.5f64.sqrt()).abs() < 1e-14);
        // y(s) = s/4 on [0, 1/2]; its maximum 0.0703125 sits at s = 9/16.
        let sup = p.data_sup_norm(6000).unwrap();
        assert!((sup - 0.070_312_5).abs() < 1e-9, "{sup}");
    }

    #[test]
    fn exact_data_solves_the_boundary_value_problem() {
        // For the Green kernel, y = K x solves -y'' = x with y(0) = y(1) = 0;
        // for x = 1 that is s(1 - s)/2.
        let one = Problem::new(
            Kernel::green(),
            FemSpace::unit_default(),
            TrueSolution::new("one", |_| 1.0, vec![]),
        );
        let pts = [0.0, 0.1, 0.5, 0.77, 1.0];
        for (s, y) in pts.iter().zip(one.exact_data(&pts).unwrap()) {
            assert!((y - s * (1.0 - s) / 2.0).abs() < 1e-16);
        }
    }

    #[test]
    fn names_resolve() {
        for name in ["quintic", "step", "zero"] {
            assert_eq!(TrueSolution::by_name(name).unwrap().name(), name);
        }
        assert!(TrueSolution::by_name("nope").is_none());
    }
}
