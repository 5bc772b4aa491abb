//! Distribution of the empirical error over many noise realizations.

use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use super::noise::{standard_normals, NoiseModel};
use super::problem::Problem;
use super::stats::{mean, pairwise_sum, pearson, std_dev};
use crate::design::SampleDesign;
use crate::error::{Error, Result};
use crate::tikhonov::{empirical_seminorm, Discretization};

pub const MIN_TAIL_TRIALS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// `bins + 1` edges.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn new(values: &[f64], bins: usize) -> Self {
        let bins = bins.max(1);
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
        let edges = (0..=bins).map(|i| lo + i as f64 * width).collect();
        let mut counts = vec![0; bins];
        for v in values {
            let idx = (((v - lo) / width) as usize).min(bins - 1);
            counts[idx] += 1;
        }
        Self { edges, counts }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailResult {
    pub n: usize,
    pub sigma: f64,
    pub alpha: f64,
    /// Per-trial `|K x - K x^dagger|_n`, in trial order.
    pub errors: Vec<f64>,
    pub mean: f64,
    pub std_dev: f64,
    pub histogram: Histogram,
    /// (standard normal quantile, standardized empirical quantile).
    pub qq_points: Vec<(f64, f64)>,
    pub qq_correlation: Option<f64>,
    /// Set when every trial produced the same error (e.g. zero noise).
    pub degenerate: bool,
}

impl TailResult {
    /// Fraction of trials whose error exceeds `mean + z * std_dev`.
    pub fn exceedance_fraction(&self, z: f64) -> f64 {
        let cut = self.mean + z * self.std_dev;
        self.errors.iter().filter(|&&e| e > cut).count() as f64 / self.errors.len() as f64
    }
}

/// Pairs sorted standardized errors with standard-normal quantiles at the
/// plotting positions `(i - 1/2) / trials`. Returns `None` for a constant
/// sample.
pub fn qq_points(errors: &[f64]) -> Option<Vec<(f64, f64)>> {
    if errors.iter().all(|e| *e == errors[0]) {
        return None;
    }
    let (m, s) = (mean(errors), std_dev(errors));
    if !(s > 0.0) {
        return None;
    }
    let normal = Normal::standard();
    let mut sorted = errors.to_vec();
    sorted.sort_by(f64::total_cmp);
    let k = sorted.len() as f64;
    Some(
        sorted
            .iter()
            .enumerate()
            .map(|(i, e)| (normal.inverse_cdf((i as f64 + 0.5) / k), (e - m) / s))
            .collect(),
    )
}

/// Repeats the reconstruction at a fixed `alpha` over `trials` independent
/// Gaussian noise draws with `sigma = delta ||K x^dagger||_inf`.
pub fn tail_experiment(
    problem: &Problem,
    n: usize,
    delta: f64,
    alpha: f64,
    trials: usize,
    base_seed: u64,
) -> Result<TailResult> {
    if trials < MIN_TAIL_TRIALS {
        return Err(Error::parameter(
            "trials",
            format!("need at least {MIN_TAIL_TRIALS}, got {trials}"),
        ));
    }
    let (a, b) = problem.kernel.domain();
    let design = SampleDesign::uniform(n, a, b)?;
    let model = NoiseModel::relative(delta, problem.data_sup_norm(n)?)?;
    let disc = Discretization::new(&problem.kernel, &problem.space, &design, &problem.quad)?;
    let factor = disc.factor(alpha)?;
    let exact = problem.exact_data(design.points())?;
    let b_exact = disc.rhs(&exact)?;
    let sigma = model.sigma();

    let errors: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<f64> {
            let rhs = if sigma == 0.0 {
                b_exact.clone()
            } else {
                let z = standard_normals(n, base_seed, t as u64);
                &b_exact + disc.rhs(&z)? * sigma
            };
            let c = factor.solve(&rhs)?;
            let kx = disc.apply(c.as_slice())?;
            let r: Vec<f64> = kx.iter().zip(&exact).map(|(p, q)| p - q).collect();
            empirical_seminorm(&r)
        })
        .collect::<Result<_>>()?;

    let mean = pairwise_sum(&errors) / errors.len() as f64;
    let sd = std_dev(&errors);
    let bins = ((trials as f64).sqrt().ceil() as usize).clamp(10, 100);
    let histogram = Histogram::new(&errors, bins);
    let (qq, corr, degenerate) = match qq_points(&errors) {
        Some(pts) => {
            let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
            let corr = pearson(&xs, &ys);
            (pts, corr, false)
        }
        None => (Vec::new(), None, true),
    };
    Ok(TailResult {
        n,
        sigma,
        alpha,
        errors,
        mean,
        std_dev: sd,
        histogram,
        qq_points: qq,
        qq_correlation: corr,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::FemSpace;
    use crate::kernel::Kernel;
    use crate::lab::problem::TrueSolution;

    fn problem() -> Problem {
        Problem::new(Kernel::green(), FemSpace::new(0.0, 1.0, 21).unwrap(), TrueSolution::quintic())
    }

    #[test]
    fn too_few_trials() {
        assert!(tail_experiment(&problem(), 200, 0.01, 1e-8, 99, 0).is_err());
    }

    #[test]
    fn zero_noise_is_degenerate() {
        let res = tail_experiment(&problem(), 200, 0.0, 1e-8, 100, 0).unwrap();
        assert!(res.degenerate);
        assert!(res.qq_correlation.is_none());
        assert!(res.errors.iter().all(|e| e.to_bits() == res.errors[0].to_bits()));
    }

    #[test]
    fn histogram_counts_everything() {
        let v: Vec<f64> = (0..57).map(|i| (i as f64).sqrt()).collect();
        let h = Histogram::new(&v, 10);
        assert_eq!(h.counts.iter().sum::<usize>(), 57);
        assert_eq!(h.edges.len(), 11);
        assert_eq!(Histogram::new(&[2.0; 5], 4).counts[0], 5);
    }

    #[test]
    fn qq_of_symmetric_sample() {
        let v: Vec<f64> = (0..200).map(|i| i as f64).collect();
        let pts = qq_points(&v).unwrap();
        assert_eq!(pts.len(), 200);
        assert!((pts[0].0 + pts[199].0).abs() < 1e-12);
        assert!(pts.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 <= w[1].1));
        assert!(qq_points(&[1.0; 10]).is_none());
    }

    #[test]
    fn noisy_errors_are_nearly_gaussian() {
        let res = tail_experiment(&problem(), 1000, 0.05, 1e-7, 400, 11).unwrap();
        assert!(!res.degenerate);
        assert!(res.qq_correlation.unwrap() > 0.97);
        assert!(res.exceedance_fraction(3.0) < 0.05);
    }
}
