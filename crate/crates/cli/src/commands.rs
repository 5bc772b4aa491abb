use fredholm_core::lab::{gen_noise, mc_error_expectation, tail_experiment, McConfig, NoiseModel, Problem};
use fredholm_core::param::adaptive_solve;
use fredholm_core::spectral::{fit_decay, quadrature_operator_matrix, spectrum};
use fredholm_core::tikhonov::Discretization;
use fredholm_core::{
    a_priori_alpha, default_alpha0, AdaptiveOptions, AlphaTrace, PriorRuleInputs, QuadratureRule,
    RegularizedSolution, Result, SampleDesign,
};
use serde_json::{json, Value};

use crate::config::{
    DataSource, NoiseSpec, ProblemSettings, RatesSettings, RuleSettings, SelectSettings, Settings,
    SingvalsSettings, SolveSettings, TailsSettings,
};
use crate::output::{float, Outputs, Table};

pub fn run(settings: &Settings) -> Result<Outputs> {
    match settings {
        Settings::Solve(s) => solve(s),
        Settings::SelectAlpha(s) => select_alpha(s),
        Settings::Rates(s) => rates(s),
        Settings::Tails(s) => tails(s),
        Settings::Singvals(s) => singvals(s),
    }
}

/// Observations ready for the solver.
struct Prepared {
    disc: Discretization,
    w: Vec<f64>,
    /// Noise standard deviation when known.
    sigma: Option<f64>,
    problem: Option<Problem>,
}

fn prepare(p: &ProblemSettings) -> Result<Prepared> {
    let problem = p
        .truth
        .clone()
        .map(|t| Problem::new(p.kernel.clone(), p.space, t));
    let quad = QuadratureRule::default();
    match &p.source {
        DataSource::File { design, values } => Ok(Prepared {
            disc: Discretization::new(&p.kernel, &p.space, design, &quad)?,
            w: values.clone(),
            sigma: None,
            problem,
        }),
        DataSource::Synthetic { n, noise, seed } => {
            let problem = problem.expect("synthetic data always has a truth");
            let (a, b) = p.kernel.domain();
            let design = SampleDesign::uniform(*n, a, b)?;
            let model = match *noise {
                NoiseSpec::Relative(d) => NoiseModel::relative(d, problem.data_sup_norm(*n)?)?,
                NoiseSpec::Absolute(s) => NoiseModel::gaussian(s)?,
            };
            let exact = problem.exact_data(design.points())?;
            let e = gen_noise(&model, *n, *seed);
            let w = exact.iter().zip(&e).map(|(y, e)| y + e).collect();
            Ok(Prepared {
                disc: Discretization::new(&p.kernel, &p.space, &design, &quad)?,
                w,
                sigma: Some(model.sigma()),
                problem: Some(problem),
            })
        }
    }
}

fn adaptive_options(prep: &Prepared, rule: RuleSettings) -> Result<AdaptiveOptions> {
    let n = prep.disc.n();
    let m = prep.disc.kernel().smoothness();
    let RuleSettings::Adaptive { c, alpha0, tol, max_iter } = rule else {
        unreachable!("adaptive options requested for a non-adaptive rule")
    };
    Ok(AdaptiveOptions {
        m,
        c,
        alpha0: match alpha0 {
            Some(a) => a,
            None => default_alpha0(n, m)?,
        },
        tol,
        max_iter,
    })
}

fn rel_error(prep: &Prepared, sol: &RegularizedSolution) -> Value {
    match &prep.problem {
        Some(p) => json!(p.relative_l2_error(&sol.x)),
        None => Value::Null,
    }
}

fn solution_table(sol: &RegularizedSolution) -> Table {
    let mut t = Table::new("solution.csv", &["node_t", "coefficient"]);
    let space = sol.x.space();
    for (j, c) in sol.x.coeffs().iter().enumerate() {
        t.push(vec![float(space.node(j)), float(*c)]);
    }
    t
}

fn trace_table(trace: &AlphaTrace) -> Table {
    let mut t = Table::new("trace.csv", &["k", "alpha", "d", "N"]);
    for it in &trace.iterations {
        t.push(vec![
            it.k.to_string(),
            float(it.alpha),
            float(it.discrepancy),
            float(it.norm_estimate),
        ]);
    }
    t
}

fn solve(s: &SolveSettings) -> Result<Outputs> {
    let prep = prepare(&s.problem)?;
    let (sol, trace) = match s.rule {
        RuleSettings::Fixed(alpha) => (prep.disc.solve(&prep.w, alpha)?, None),
        RuleSettings::APriori { c } => {
            let problem = prep.problem.as_ref().expect("checked during validation");
            let sigma = prep.sigma.expect("checked during validation");
            let m = prep.disc.kernel().smoothness();
            let inputs =
                PriorRuleInputs::new(sigma, prep.disc.n(), problem.xdag_norm(), m).with_constant(c);
            (prep.disc.solve(&prep.w, a_priori_alpha(&inputs)?)?, None)
        }
        RuleSettings::Adaptive { .. } => {
            let opts = adaptive_options(&prep, s.rule)?;
            let (trace, sol) = adaptive_solve(&prep.disc, &prep.w, &opts)?;
            (sol, Some(trace))
        }
    };
    let mut tables = vec![solution_table(&sol)];
    tables.extend(trace.as_ref().map(trace_table));
    Ok(Outputs {
        tables,
        summary: json!({
            "alpha": sol.alpha,
            "discrepancy": sol.discrepancy,
            "solution_norm": sol.solution_norm,
            "objective": sol.objective,
            "rel_l2_error": rel_error(&prep, &sol),
        }),
    })
}

fn select_alpha(s: &SelectSettings) -> Result<Outputs> {
    let prep = prepare(&s.problem)?;
    let opts = adaptive_options(&prep, s.rule)?;
    let (trace, sol) = adaptive_solve(&prep.disc, &prep.w, &opts)?;
    Ok(Outputs {
        tables: vec![trace_table(&trace)],
        summary: json!({
            "alpha_final": trace.alpha_final,
            "iterations": trace.iterations.len(),
            "stop_reason": trace.stop_reason.as_str(),
            "converged": trace.converged,
            "alpha0": opts.alpha0,
            "discrepancy": sol.discrepancy,
            "solution_norm": sol.solution_norm,
            "sigma": prep.sigma,
            "rel_l2_error": rel_error(&prep, &sol),
        }),
    })
}

fn rates(s: &RatesSettings) -> Result<Outputs> {
    let problem = Problem::new(s.kernel.clone(), s.space, s.truth.clone());
    let cfg = McConfig {
        trials: s.trials,
        base_seed: s.seed,
        n_grid: s.n_grid.clone(),
        noise_grid: s.noise_grid.clone(),
        measure: s.measure,
        alpha_rule: s.rule.to_alpha_rule(),
        truncation: s.truncation,
    };
    let res = mc_error_expectation(&cfg, &problem)?;
    let mut table = Table::new(
        "rates.csv",
        &["n", "sigma", "eta", "mean_sq_error", "normalized", "alpha"],
    );
    for p in &res.points {
        table.push(vec![
            p.n.to_string(),
            float(p.sigma),
            float(p.eta),
            float(p.mean_sq_error),
            float(p.normalized),
            float(p.alpha),
        ]);
    }
    let mut summary = json!({
        "measure": res.measure.as_str(),
        "theory_slope": res.theory_slope,
        "normalization_exponent": res.normalization_exponent,
        "insufficient_points": res.fit.is_none(),
        "trials": s.trials,
    });
    if let Some(fit) = res.fit {
        summary["slope"] = json!(fit.slope);
        summary["intercept"] = json!(fit.intercept);
        summary["residual_rms"] = json!(fit.residual_rms);
    }
    Ok(Outputs {
        tables: vec![table],
        summary,
    })
}

fn tails(s: &TailsSettings) -> Result<Outputs> {
    let problem = Problem::new(s.kernel.clone(), s.space, s.truth.clone());
    let alpha = match s.alpha {
        Some(a) => a,
        None => {
            let sigma = s.delta * problem.data_sup_norm(s.n)?;
            let m = s.kernel.smoothness();
            a_priori_alpha(&PriorRuleInputs::new(sigma, s.n, problem.xdag_norm(), m).with_constant(s.c))?
        }
    };
    let res = tail_experiment(&problem, s.n, s.delta, alpha, s.trials, s.seed)?;

    let mut errors = Table::new("errors.csv", &["trial", "error"]);
    for (t, e) in res.errors.iter().enumerate() {
        errors.push(vec![t.to_string(), float(*e)]);
    }
    let mut qq = Table::new("qq.csv", &["normal_quantile", "standardized_error"]);
    for (q, e) in &res.qq_points {
        qq.push(vec![float(*q), float(*e)]);
    }
    let mut hist = Table::new("histogram.csv", &["lower", "upper", "count"]);
    let h = &res.histogram;
    for (i, count) in h.counts.iter().enumerate() {
        hist.push(vec![float(h.edges[i]), float(h.edges[i + 1]), count.to_string()]);
    }
    Ok(Outputs {
        tables: vec![errors, qq, hist],
        summary: json!({
            "qq_correlation": res.qq_correlation,
            "degenerate": res.degenerate,
            "alpha": res.alpha,
            "sigma": res.sigma,
            "n": res.n,
            "trials": res.errors.len(),
            "mean": res.mean,
            "std_dev": res.std_dev,
            "exceedance_z2": res.exceedance_fraction(2.0),
            "exceedance_z3": res.exceedance_fraction(3.0),
        }),
    })
}

fn singvals(s: &SingvalsSettings) -> Result<Outputs> {
    let values = spectrum(&quadrature_operator_matrix(&s.kernel, s.points)?)?;
    let (j0, j1) = s.window;
    let fit = fit_decay(&values, j0, j1)?;
    let mut table = Table::new("singular_values.csv", &["j", "s_j"]);
    for (j, v) in values.iter().enumerate() {
        table.push(vec![(j + 1).to_string(), float(*v)]);
    }
    Ok(Outputs {
        tables: vec![table],
        summary: json!({
            "kernel": s.kernel.name(),
            "points": s.points,
            "slope": fit.slope,
            "intercept": fit.intercept,
            "residual_rms": fit.residual_rms,
            "window": [j0, j1],
        }),
    })
}
