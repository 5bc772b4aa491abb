//! Randomized invariants of the solver, the parameter rules and the
//! Monte Carlo driver.

use fredholm_core::lab::{
    fit_loglog, gen_noise, mc_error_expectation, tail_experiment, AlphaRule, ErrorMeasure,
    McConfig, NoiseLevel, NoiseModel, Problem, TrueSolution,
};
use fredholm_core::param::{adaptive_alpha_with, adaptive_update, rule_exponent};
use fredholm_core::tikhonov::Discretization;
use fredholm_core::{
    a_priori_alpha, AdaptiveOptions, FemSpace, Kernel, PriorRuleInputs, QuadratureRule,
    SampleDesign,
};
use nalgebra::DVector;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random discretized problem with noisy data.
struct Instance {
    disc: Discretization,
    w: Vec<f64>,
}

fn random_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kernel = if rng.random_bool(0.5) { Kernel::green() } else { Kernel::exponential() };
    let space = FemSpace::new(0.0, 1.0, rng.random_range(6..=31)).unwrap();
    let n = rng.random_range(20..=300);
    let design = SampleDesign::uniform(n, 0.0, 1.0).unwrap();
    let disc = Discretization::new(&kernel, &space, &design, &QuadratureRule::default()).unwrap();
    let modes: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
    let truth = space
        .interpolate(|t| {
            modes
                .iter()
                .enumerate()
                .map(|(k, a)| a * ((k + 1) as f64 * std::f64::consts::PI * t).sin())
                .sum()
        })
        .unwrap();
    let clean = disc.apply(truth.coeffs()).unwrap();
    let scale = clean.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-12);
    let sigma = scale * rng.random_range(1e-3..1e-1);
    let noise = gen_noise(&NoiseModel::gaussian(sigma).unwrap(), n, seed ^ 0x5eed);
    let w = clean.iter().zip(&noise).map(|(a, b)| a + b).collect();
    Instance { disc, w }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn norm_falls_and_discrepancy_rises_with_alpha(seed in any::<u64>()) {
        let inst = random_instance(seed);
        let ladder = [1e-9, 1e-7, 1e-5, 1e-3, 1e-1, 10.0];
        let sols: Vec<_> = ladder.iter().map(|&a| inst.disc.solve(&inst.w, a).unwrap()).collect();
        for pair in sols.windows(2) {
            let (lo, hi) = (&pair[0], &pair[1]);
            prop_assert!(lo.solution_norm >= hi.solution_norm * (1.0 - 1e-12));
            prop_assert!(lo.discrepancy <= hi.discrepancy * (1.0 + 1e-12) + 1e-15);
        }
    }

    #[test]
    fn variational_identity_holds(seed in any::<u64>(), log_alpha in -10.0f64..0.0) {
        let inst = random_instance(seed);
        let alpha = 10f64.powf(log_alpha);
        let sol = inst.disc.solve(&inst.w, alpha).unwrap();
        let residual = inst.disc.variational_residual(sol.x.coeffs(), &inst.w, alpha).unwrap();
        let (a, b) = fredholm_core::tikhonov::assemble(
            inst.disc.operator(), inst.disc.mass(), &inst.w, alpha).unwrap();
        let c = DVector::from_column_slice(sol.x.coeffs());
        let scale = b.norm() + a.norm() * c.norm();
        let worst = residual.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        prop_assert!(worst <= 1e-9 * scale, "residual {worst:e}, scale {scale:e}");
    }

    #[test]
    fn solution_beats_bumps_and_random_candidates(seed in any::<u64>(), log_alpha in -8.0f64..-1.0) {
        let inst = random_instance(seed);
        let alpha = 10f64.powf(log_alpha);
        let sol = inst.disc.solve(&inst.w, alpha).unwrap();
        let best = inst.disc.objective(sol.x.coeffs(), &inst.w, alpha).unwrap();
        let tol = 1e-12 * best.abs().max(1e-300);
        let m = sol.x.coeffs().len();
        for i in 0..m {
            for eps in [1e-3, -1e-3] {
                let mut c = sol.x.coeffs().to_vec();
                c[i] += eps;
                prop_assert!(best <= inst.disc.objective(&c, &inst.w, alpha).unwrap() + tol);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
        for _ in 0..100 {
            let c: Vec<f64> = sol.x.coeffs().iter().map(|v| v + rng.random_range(-1.0..1.0)).collect();
            prop_assert!(best <= inst.disc.objective(&c, &inst.w, alpha).unwrap() + tol);
        }
    }

    #[test]
    fn solution_scales_exactly_with_power_of_two(seed in any::<u64>(), k in -20i32..20, neg in any::<bool>()) {
        let inst = random_instance(seed);
        let factor = if neg { -(2f64.powi(k)) } else { 2f64.powi(k) };
        let base = inst.disc.solve(&inst.w, 1e-6).unwrap();
        let scaled_w: Vec<f64> = inst.w.iter().map(|v| v * factor).collect();
        let scaled = inst.disc.solve(&scaled_w, 1e-6).unwrap();
        for (a, b) in base.x.coeffs().iter().zip(scaled.x.coeffs()) {
            prop_assert_eq!((a * factor).to_bits(), b.to_bits());
        }
    }

    #[test]
    fn solution_scales_with_data(seed in any::<u64>(), factor in -50.0f64..50.0) {
        let inst = random_instance(seed);
        let alpha = 1e-6;
        let base = inst.disc.solve(&inst.w, alpha).unwrap();
        let scaled_w: Vec<f64> = inst.w.iter().map(|v| v * factor).collect();
        let scaled = inst.disc.solve(&scaled_w, alpha).unwrap();
        // Backward-stable solves agree to about cond(A) * eps relative.
        let (a, _) = fredholm_core::tikhonov::assemble(
            inst.disc.operator(), inst.disc.mass(), &inst.w, alpha).unwrap();
        let eig = a.symmetric_eigenvalues();
        let cond = eig.max() / eig.min();
        let expected = DVector::from_column_slice(base.x.coeffs()) * factor;
        let got = DVector::from_column_slice(scaled.x.coeffs());
        let rel = (&got - &expected).norm() / expected.norm().max(1e-300);
        prop_assert!(rel <= 10.0 * cond * f64::EPSILON, "relative {rel:e}, cond {cond:e}");
    }

    #[test]
    fn adaptive_trace_is_monotone_bounded_and_idempotent(seed in any::<u64>(), c in 0.2f64..5.0) {
        let inst = random_instance(seed);
        let n = inst.disc.n();
        let m = inst.disc.kernel().smoothness();
        let mut opts = AdaptiveOptions::defaults(n, m).unwrap();
        opts.c = c;
        opts.max_iter = 40;
        let trace = adaptive_alpha_with(&inst.disc, &inst.w, &opts).unwrap();
        prop_assert!(trace.is_monotone_from(1), "{:?}", trace.alphas());
        let cap = c.powf(rule_exponent(m));
        for a in trace.alphas().iter().skip(1) {
            prop_assert!(*a > 0.0 && *a <= cap * (1.0 + 1e-12));
        }
        if trace.converged {
            let sol = inst.disc.solve(&inst.w, trace.alpha_final).unwrap();
            let again = adaptive_update(sol.discrepancy, sol.solution_norm, n, m, c);
            // One more pass moves alpha by less than the tolerance, up to the
            // contraction of the final step.
            let rel = ((again - trace.alpha_final) / trace.alpha_final).abs();
            prop_assert!(rel < opts.tol, "relative move {rel:e}");
        }
    }

    #[test]
    fn prior_rule_orders_in_sigma_and_norm(
        sigma in 1e-6f64..1.0,
        bump in 1.01f64..10.0,
        norm in 1e-3f64..10.0,
        n in 1usize..100_000,
    ) {
        let base = a_priori_alpha(&PriorRuleInputs::new(sigma, n, norm, 2)).unwrap();
        let louder = a_priori_alpha(&PriorRuleInputs::new(sigma * bump, n, norm, 2)).unwrap();
        let bigger = a_priori_alpha(&PriorRuleInputs::new(sigma, n, norm * bump, 2)).unwrap();
        prop_assert!(louder > base);
        prop_assert!(bigger < base);
    }

    #[test]
    fn loglog_slope_ignores_rescaling(
        ys in prop::collection::vec(1e-8f64..1e3, 4),
        shift in 1e-3f64..1e3,
    ) {
        let xs = [1e-4, 3e-4, 1e-3, 5e-3];
        let raw = fit_loglog(&xs, &ys).unwrap();
        let scaled: Vec<f64> = ys.iter().map(|y| y * shift).collect();
        let moved = fit_loglog(&xs, &scaled).unwrap();
        prop_assert!((raw.slope - moved.slope).abs() <= 1e-12 * raw.slope.abs().max(1.0));
        prop_assert!((moved.intercept - raw.intercept - shift.ln()).abs() <= 1e-9);
    }
}

fn small_problem(truth: TrueSolution) -> Problem {
    Problem::new(Kernel::green(), FemSpace::new(0.0, 1.0, 21).unwrap(), truth)
}

fn small_config(measure: ErrorMeasure) -> McConfig {
    McConfig {
        trials: 24,
        base_seed: 99,
        n_grid: vec![100, 200, 400],
        noise_grid: vec![NoiseLevel::Relative(0.01), NoiseLevel::Relative(0.05)],
        measure,
        alpha_rule: AlphaRule::APriori { c: 1.0 },
        truncation: 32,
    }
}

#[test]
fn rate_slope_is_exactly_invariant_to_normalization() {
    for measure in [ErrorMeasure::Empirical, ErrorMeasure::WStar, ErrorMeasure::L2] {
        let res = mc_error_expectation(&small_config(measure), &small_problem(TrueSolution::quintic())).unwrap();
        let fit = res.fit.expect("several noise levels");
        let etas: Vec<f64> = res.points.iter().map(|p| p.eta).collect();
        let raw: Vec<f64> = res.points.iter().map(|p| p.mean_sq_error).collect();
        let norm: Vec<f64> = res.points.iter().map(|p| p.normalized).collect();
        let raw_fit = fit_loglog(&etas, &raw).unwrap();
        assert_eq!(fit.slope.to_bits(), raw_fit.slope.to_bits(), "{}", measure.as_str());
        let norm_fit = fit_loglog(&etas, &norm).unwrap();
        assert!((norm_fit.slope - fit.slope).abs() <= 1e-12);
        assert!((norm_fit.intercept - fit.intercept).abs() <= 1e-9);
    }
}

#[test]
fn rate_points_are_sorted_and_nonnegative() {
    let res = mc_error_expectation(&small_config(ErrorMeasure::Empirical), &small_problem(TrueSolution::step())).unwrap();
    assert!(res.points.windows(2).all(|w| w[0].eta <= w[1].eta));
    assert!(res.points.iter().all(|p| p.mean_sq_error >= 0.0 && p.normalized >= 0.0));
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn monte_carlo_is_bitwise_independent_of_thread_count() {
    let problem = small_problem(TrueSolution::quintic());
    let mut cfg = small_config(ErrorMeasure::Empirical);
    cfg.alpha_rule = AlphaRule::Adaptive { c: 1.0, tol: 1e-3, max_iter: 15 };
    let one = in_pool(1, || mc_error_expectation(&cfg, &problem).unwrap());
    let four = in_pool(4, || mc_error_expectation(&cfg, &problem).unwrap());
    for (a, b) in one.points.iter().zip(&four.points) {
        assert_eq!(a.mean_sq_error.to_bits(), b.mean_sq_error.to_bits());
        assert_eq!(a.alpha.to_bits(), b.alpha.to_bits());
    }
    assert_eq!(one.fit.unwrap().slope.to_bits(), four.fit.unwrap().slope.to_bits());
}

#[test]
fn tail_errors_are_bitwise_independent_of_thread_count() {
    let problem = small_problem(TrueSolution::quintic());
    let one = in_pool(1, || tail_experiment(&problem, 200, 0.01, 1e-6, 128, 5).unwrap());
    let four = in_pool(4, || tail_experiment(&problem, 200, 0.01, 1e-6, 128, 5).unwrap());
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&one.errors), bits(&four.errors));
    assert!(one.qq_correlation.is_some());
}

#[test]
fn gaussian_noise_obeys_law_of_large_numbers() {
    let n = 100_000;
    let z = gen_noise(&NoiseModel::gaussian(1.0).unwrap(), n, 2024);
    let mean = z.iter().sum::<f64>() / n as f64;
    let var = z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    assert!(mean.abs() <= 4.0 / (n as f64).sqrt(), "mean {mean}");
    assert!((var - 1.0).abs() <= 0.05, "variance {var}");
}

#[test]
fn distinct_seeds_give_uncorrelated_noise() {
    let model = NoiseModel::gaussian(1.0).unwrap();
    let a = gen_noise(&model, 50_000, 1);
    let b = gen_noise(&model, 50_000, 2);
    let r = fredholm_core::lab::stats::pearson(&a, &b).unwrap();
    assert!(r.abs() < 4.0 / (50_000f64).sqrt(), "correlation {r}");
}
