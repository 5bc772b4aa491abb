//! Run configuration: a flat TOML file overlaid with command-line flags, then
//! resolved into validated settings before any computation starts.

use std::fmt;
use std::path::{Path, PathBuf};

use fredholm_core::lab::{AlphaRule, ErrorMeasure, NoiseLevel, TrueSolution, MIN_TAIL_TRIALS};
use fredholm_core::{FemSpace, Kernel, SampleDesign};
use serde::Deserialize;

use crate::args::{Cli, Command, ProblemArgs, RuleArgs};

pub const DEFAULT_SEED: u64 = 20251015;
pub const DEFAULT_MESH_SIZE: f64 = 0.02;

/// A rejected configuration value.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid `{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

type Result<T> = std::result::Result<T, ConfigError>;

/// Every key accepted in the config file. All keys are optional.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub kernel: Option<String>,
    pub nodes: Option<usize>,
    pub mesh_size: Option<f64>,
    pub truth: Option<String>,
    pub n: Option<usize>,
    pub delta: Option<f64>,
    pub sigma: Option<f64>,
    pub data: Option<PathBuf>,
    pub alpha_rule: Option<String>,
    pub alpha: Option<f64>,
    pub c: Option<f64>,
    pub alpha0: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub measure: Option<String>,
    pub n_grid: Option<Vec<usize>>,
    pub delta_grid: Option<Vec<f64>>,
    pub sigma_grid: Option<Vec<f64>>,
    pub truncation: Option<usize>,
    pub points: Option<usize>,
    pub j0: Option<usize>,
    pub j1: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("config", format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| ConfigError::new("config", e.to_string()))
    }

    fn overlay_problem(&mut self, p: &ProblemArgs) {
        set(&mut self.kernel, &p.kernel);
        set(&mut self.nodes, &p.nodes);
        set(&mut self.mesh_size, &p.mesh_size);
        set(&mut self.truth, &p.truth);
        set(&mut self.n, &p.n);
        set(&mut self.delta, &p.delta);
        set(&mut self.sigma, &p.sigma);
        set(&mut self.data, &p.data);
    }

    fn overlay_rule(&mut self, r: &RuleArgs) {
        set(&mut self.alpha_rule, &r.alpha_rule);
        set(&mut self.alpha, &r.alpha);
        set(&mut self.c, &r.c);
        set(&mut self.alpha0, &r.alpha0);
        set(&mut self.tol, &r.tol);
        set(&mut self.max_iter, &r.max_iter);
    }

    /// Applies the global and subcommand flags on top of the file values.
    pub fn overlay(&mut self, cli: &Cli) {
        set(&mut self.out, &cli.out);
        set(&mut self.seed, &cli.seed);
        set(&mut self.trials, &cli.trials);
        match &cli.command {
            Command::Solve(a) => {
                self.overlay_problem(&a.problem);
                self.overlay_rule(&a.rule);
            }
            Command::SelectAlpha(a) => {
                self.overlay_problem(&a.problem);
                set(&mut self.c, &a.c);
                set(&mut self.alpha0, &a.alpha0);
                set(&mut self.tol, &a.tol);
                set(&mut self.max_iter, &a.max_iter);
            }
            Command::Rates(a) => {
                set(&mut self.kernel, &a.kernel);
                set(&mut self.nodes, &a.nodes);
                set(&mut self.mesh_size, &a.mesh_size);
                set(&mut self.truth, &a.truth);
                set(&mut self.measure, &a.measure);
                set(&mut self.n_grid, &a.n_grid);
                set(&mut self.delta_grid, &a.delta_grid);
                set(&mut self.sigma_grid, &a.sigma_grid);
                set(&mut self.truncation, &a.truncation);
                self.overlay_rule(&a.rule);
            }
            Command::Tails(a) => {
                set(&mut self.kernel, &a.kernel);
                set(&mut self.nodes, &a.nodes);
                set(&mut self.mesh_size, &a.mesh_size);
                set(&mut self.truth, &a.truth);
                set(&mut self.n, &a.n);
                set(&mut self.delta, &a.delta);
                set(&mut self.alpha, &a.alpha);
                set(&mut self.c, &a.c);
            }
            Command::Singvals(a) => {
                set(&mut self.kernel, &a.kernel);
                set(&mut self.points, &a.points);
                set(&mut self.j0, &a.j0);
                set(&mut self.j1, &a.j1);
            }
        }
    }
}

fn set<T: Clone>(slot: &mut Option<T>, flag: &Option<T>) {
    if flag.is_some() {
        slot.clone_from(flag);
    }
}

fn positive(field: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(ConfigError::new(field, format!("must be positive and finite, got {v}")))
    }
}

fn non_negative(field: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(ConfigError::new(field, format!("must be non-negative and finite, got {v}")))
    }
}

fn at_least(field: &str, v: usize, min: usize) -> Result<usize> {
    if v >= min {
        Ok(v)
    } else {
        Err(ConfigError::new(field, format!("must be at least {min}, got {v}")))
    }
}

pub fn parse_kernel(name: Option<&str>) -> Result<Kernel> {
    match name.unwrap_or("green") {
        "green" => Ok(Kernel::green()),
        "exponential" => Ok(Kernel::exponential()),
        other => Err(ConfigError::new(
            "kernel",
            format!("unknown kernel '{other}' (expected green or exponential)"),
        )),
    }
}

fn parse_truth(name: &str) -> Result<TrueSolution> {
    TrueSolution::by_name(name).ok_or_else(|| {
        ConfigError::new("truth", format!("unknown truth '{name}' (expected quintic, step or zero)"))
    })
}

fn parse_space(cfg: &FileConfig, kernel: &Kernel) -> Result<FemSpace> {
    let (a, b) = kernel.domain();
    if let Some(nodes) = cfg.nodes {
        at_least("nodes", nodes, 2)?;
        return FemSpace::new(a, b, nodes).map_err(|e| ConfigError::new("nodes", e.to_string()));
    }
    let h = positive("mesh_size", cfg.mesh_size.unwrap_or(DEFAULT_MESH_SIZE))?;
    FemSpace::with_mesh_size(a, b, h).map_err(|e| ConfigError::new("mesh_size", e.to_string()))
}

fn parse_measure(name: Option<&str>) -> Result<ErrorMeasure> {
    match name.unwrap_or("empirical") {
        "empirical" => Ok(ErrorMeasure::Empirical),
        "wstar" => Ok(ErrorMeasure::WStar),
        "l2" => Ok(ErrorMeasure::L2),
        other => Err(ConfigError::new(
            "measure",
            format!("unknown measure '{other}' (expected empirical, wstar or l2)"),
        )),
    }
}

/// How the regularization parameter is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RuleSettings {
    Fixed(f64),
    APriori { c: f64 },
    Adaptive { c: f64, alpha0: Option<f64>, tol: f64, max_iter: usize },
}

impl RuleSettings {
    pub fn to_alpha_rule(self) -> AlphaRule {
        match self {
            RuleSettings::Fixed(a) => AlphaRule::Fixed(a),
            RuleSettings::APriori { c } => AlphaRule::APriori { c },
            RuleSettings::Adaptive { c, tol, max_iter, .. } => AlphaRule::Adaptive { c, tol, max_iter },
        }
    }
}

fn parse_adaptive(cfg: &FileConfig) -> Result<RuleSettings> {
    Ok(RuleSettings::Adaptive {
        c: positive("c", cfg.c.unwrap_or(1.0))?,
        alpha0: cfg.alpha0.map(|v| positive("alpha0", v)).transpose()?,
        tol: positive("tol", cfg.tol.unwrap_or(1e-3))?,
        max_iter: at_least("max_iter", cfg.max_iter.unwrap_or(15), 1)?,
    })
}

/// Resolves the parameter rule; `default` applies when `alpha_rule` is unset
/// and no fixed `alpha` is given.
fn parse_rule(cfg: &FileConfig, default: &str) -> Result<RuleSettings> {
    let name = match (&cfg.alpha_rule, cfg.alpha) {
        (Some(r), _) => r.as_str(),
        (None, Some(_)) => "fixed",
        (None, None) => default,
    };
    match name {
        "fixed" => {
            let alpha = cfg
                .alpha
                .ok_or_else(|| ConfigError::new("alpha", "required by the fixed rule"))?;
            Ok(RuleSettings::Fixed(positive("alpha", alpha)?))
        }
        "a-priori" => Ok(RuleSettings::APriori {
            c: positive("c", cfg.c.unwrap_or(1.0))?,
        }),
        "adaptive" => parse_adaptive(cfg),
        other => Err(ConfigError::new(
            "alpha_rule",
            format!("unknown rule '{other}' (expected fixed, a-priori or adaptive)"),
        )),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseSpec {
    Relative(f64),
    Absolute(f64),
}

/// Where the observations come from.
#[derive(Debug, Clone)]
pub enum DataSource {
    Synthetic { n: usize, noise: NoiseSpec, seed: u64 },
    File { design: SampleDesign, values: Vec<f64> },
}

/// Kernel, mesh and observations for solve and select-alpha.
#[derive(Debug, Clone)]
pub struct ProblemSettings {
    pub kernel: Kernel,
    pub space: FemSpace,
    /// Known ground truth, used for synthetic data and error reporting.
    pub truth: Option<TrueSolution>,
    pub source: DataSource,
}

fn parse_noise(cfg: &FileConfig, default_delta: f64) -> Result<NoiseSpec> {
    match (cfg.sigma, cfg.delta) {
        (Some(s), _) => Ok(NoiseSpec::Absolute(non_negative("sigma", s)?)),
        (None, d) => Ok(NoiseSpec::Relative(non_negative("delta", d.unwrap_or(default_delta))?)),
    }
}

fn read_data_file(path: &Path, kernel: &Kernel) -> Result<(SampleDesign, Vec<f64>)> {
    let err = |msg: String| ConfigError::new("data", format!("{}: {msg}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| err(e.to_string()))?;
    let headers = reader.headers().map_err(|e| err(e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| err(format!("missing column '{name}'")))
    };
    let (si, wi) = (col("s")?, col("w")?);
    let mut points = Vec::new();
    let mut values = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| err(e.to_string()))?;
        let parse = |i: usize| -> Result<f64> {
            let field = record.get(i).unwrap_or("").trim();
            let v: f64 = field
                .parse()
                .map_err(|_| err(format!("row {}: cannot parse '{field}'", line + 2)))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(err(format!("row {}: non-finite value", line + 2)))
            }
        };
        points.push(parse(si)?);
        values.push(parse(wi)?);
    }
    let design = SampleDesign::new(points).map_err(|e| err(e.to_string()))?;
    let (a, b) = kernel.domain();
    design.check_within(a, b).map_err(|e| err(e.to_string()))?;
    Ok((design, values))
}

impl ProblemSettings {
    fn resolve(cfg: &FileConfig) -> Result<Self> {
        let kernel = parse_kernel(cfg.kernel.as_deref())?;
        let space = parse_space(cfg, &kernel)?;
        if let Some(path) = &cfg.data {
            let (design, values) = read_data_file(path, &kernel)?;
            let truth = cfg.truth.as_deref().map(parse_truth).transpose()?;
            return Ok(Self {
                kernel,
                space,
                truth,
                source: DataSource::File { design, values },
            });
        }
        let truth = parse_truth(cfg.truth.as_deref().unwrap_or("quintic"))?;
        let n = at_least("n", cfg.n.unwrap_or(1000), 2)?;
        Ok(Self {
            kernel,
            space,
            truth: Some(truth),
            source: DataSource::Synthetic {
                n,
                noise: parse_noise(cfg, 0.01)?,
                seed: cfg.seed.unwrap_or(DEFAULT_SEED),
            },
        })
    }
}

#[derive(Debug, Clone)]
pub struct SolveSettings {
    pub problem: ProblemSettings,
    pub rule: RuleSettings,
}

#[derive(Debug, Clone)]
pub struct SelectSettings {
    pub problem: ProblemSettings,
    pub rule: RuleSettings,
}

#[derive(Debug, Clone)]
pub struct RatesSettings {
    pub kernel: Kernel,
    pub space: FemSpace,
    pub truth: TrueSolution,
    pub measure: ErrorMeasure,
    pub trials: usize,
    pub seed: u64,
    pub n_grid: Vec<usize>,
    pub noise_grid: Vec<NoiseLevel>,
    pub rule: RuleSettings,
    pub truncation: usize,
}

#[derive(Debug, Clone)]
pub struct TailsSettings {
    pub kernel: Kernel,
    pub space: FemSpace,
    pub truth: TrueSolution,
    pub n: usize,
    pub delta: f64,
    /// `None` selects the a priori rule with multiplier `c`.
    pub alpha: Option<f64>,
    pub c: f64,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct SingvalsSettings {
    pub kernel: Kernel,
    pub points: usize,
    pub window: (usize, usize),
}

#[derive(Debug, Clone)]
pub enum Settings {
    Solve(SolveSettings),
    SelectAlpha(SelectSettings),
    Rates(RatesSettings),
    Tails(TailsSettings),
    Singvals(SingvalsSettings),
}

/// Fully validated run: output directory, thread count and command settings.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub out: PathBuf,
    pub threads: Option<usize>,
    pub settings: Settings,
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self> {
        let mut cfg = match &cli.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        cfg.overlay(cli);
        let threads = cli.threads.map(|t| at_least("threads", t, 1)).transpose()?;
        let settings = match &cli.command {
            Command::Solve(_) => {
                let problem = ProblemSettings::resolve(&cfg)?;
                let rule = parse_rule(&cfg, "a-priori")?;
                if matches!(rule, RuleSettings::APriori { .. })
                    && matches!(problem.source, DataSource::File { .. })
                {
                    return Err(ConfigError::new(
                        "alpha_rule",
                        "a-priori needs the noise level and solution norm; use fixed or adaptive with a data file",
                    ));
                }
                Settings::Solve(SolveSettings { problem, rule })
            }
            Command::SelectAlpha(_) => Settings::SelectAlpha(SelectSettings {
                problem: ProblemSettings::resolve(&cfg)?,
                rule: parse_adaptive(&cfg)?,
            }),
            Command::Rates(_) => Settings::Rates(resolve_rates(&cfg)?),
            Command::Tails(_) => Settings::Tails(resolve_tails(&cfg)?),
            Command::Singvals(_) => Settings::Singvals(resolve_singvals(&cfg)?),
        };
        Ok(Self {
            out: cfg.out.clone().unwrap_or_else(|| PathBuf::from("out")),
            threads,
            settings,
        })
    }
}

fn resolve_rates(cfg: &FileConfig) -> Result<RatesSettings> {
    let kernel = parse_kernel(cfg.kernel.as_deref())?;
    let space = parse_space(cfg, &kernel)?;
    let truth = parse_truth(cfg.truth.as_deref().unwrap_or("quintic"))?;
    let measure = parse_measure(cfg.measure.as_deref())?;
    if measure == ErrorMeasure::WStar && !matches!(kernel.kind(), fredholm_core::KernelKind::Green) {
        return Err(ConfigError::new("measure", "wstar is only available for the green kernel"));
    }
    let n_grid = cfg.n_grid.clone().unwrap_or_else(|| vec![2500, 5000, 10000, 20000]);
    if n_grid.is_empty() {
        return Err(ConfigError::new("n_grid", "must not be empty"));
    }
    for &n in &n_grid {
        at_least("n_grid", n, 2)?;
    }
    let noise_grid: Vec<NoiseLevel> = match (&cfg.sigma_grid, &cfg.delta_grid) {
        (Some(s), _) => s
            .iter()
            .map(|&v| non_negative("sigma_grid", v).map(NoiseLevel::Absolute))
            .collect::<Result<_>>()?,
        (None, d) => d
            .clone()
            .unwrap_or_else(|| vec![0.005, 0.01, 0.05, 0.1])
            .into_iter()
            .map(|v| non_negative("delta_grid", v).map(NoiseLevel::Relative))
            .collect::<Result<_>>()?,
    };
    if noise_grid.is_empty() {
        let field = if cfg.sigma_grid.is_some() { "sigma_grid" } else { "delta_grid" };
        return Err(ConfigError::new(field, "must not be empty"));
    }
    Ok(RatesSettings {
        kernel,
        space,
        truth,
        measure,
        trials: at_least("trials", cfg.trials.unwrap_or(500), 1)?,
        seed: cfg.seed.unwrap_or(DEFAULT_SEED),
        n_grid,
        noise_grid,
        rule: parse_rule(cfg, "a-priori")?,
        truncation: at_least("truncation", cfg.truncation.unwrap_or(64), 1)?,
    })
}

fn resolve_tails(cfg: &FileConfig) -> Result<TailsSettings> {
    let kernel = parse_kernel(cfg.kernel.as_deref())?;
    let space = parse_space(cfg, &kernel)?;
    Ok(TailsSettings {
        truth: parse_truth(cfg.truth.as_deref().unwrap_or("quintic"))?,
        n: at_least("n", cfg.n.unwrap_or(10000), 2)?,
        delta: non_negative("delta", cfg.delta.unwrap_or(0.01))?,
        alpha: cfg.alpha.map(|a| positive("alpha", a)).transpose()?,
        c: positive("c", cfg.c.unwrap_or(1.0))?,
        trials: at_least("trials", cfg.trials.unwrap_or(2000), MIN_TAIL_TRIALS)?,
        seed: cfg.seed.unwrap_or(DEFAULT_SEED),
        kernel,
        space,
    })
}

fn resolve_singvals(cfg: &FileConfig) -> Result<SingvalsSettings> {
    let kernel = parse_kernel(cfg.kernel.as_deref())?;
    let points = at_least("points", cfg.points.unwrap_or(2000), 2)?;
    let (d0, d1) = fredholm_core::spectral::default_decay_window(points);
    let j0 = at_least("j0", cfg.j0.unwrap_or(d0), 1)?;
    let j1 = cfg.j1.unwrap_or(d1);
    if j1 <= j0 || j1 > points {
        return Err(ConfigError::new(
            "j1",
            format!("window needs j0 < j1 <= points, got j0 = {j0}, j1 = {j1}, points = {points}"),
        ));
    }
    Ok(SingvalsSettings {
        kernel,
        points,
        window: (j0, j1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;

    fn resolve(args: &[&str]) -> Result<RunConfig> {
        let cli = Cli::try_parse_from(std::iter::once("fredholm").chain(args.iter().copied())).unwrap();
        RunConfig::from_cli(&cli)
    }

    #[test]
    fn negative_alpha_names_the_field() {
        let err = resolve(&["solve", "--alpha", "-1"]).unwrap_err();
        assert_eq!(err.field, "alpha");
    }

    #[test]
    fn flags_override_file_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "n = 50\nalpha = 1e-4\nkernel = \"exponential\"\n").unwrap();
        let cfg = resolve(&["--config", path.to_str().unwrap(), "solve", "--n", "80"]).unwrap();
        let Settings::Solve(s) = cfg.settings else { panic!() };
        assert_eq!(s.rule, RuleSettings::Fixed(1e-4));
        assert_eq!(s.problem.kernel.name(), "exponential");
        assert!(matches!(s.problem.source, DataSource::Synthetic { n: 80, .. }));
    }

    #[test]
    fn unknown_file_key_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "alpah = 1.0\n").unwrap();
        let err = resolve(&["--config", path.to_str().unwrap(), "solve"]).unwrap_err();
        assert_eq!(err.field, "config");
    }

    #[test]
    fn tails_needs_enough_trials() {
        assert_eq!(resolve(&["--trials", "50", "tails"]).unwrap_err().field, "trials");
    }

    #[test]
    fn singvals_window_is_checked() {
        let err = resolve(&["singvals", "--points", "100", "--j0", "10", "--j1", "200"]).unwrap_err();
        assert_eq!(err.field, "j1");
        let ok = resolve(&["singvals", "--points", "100"]).unwrap();
        let Settings::Singvals(s) = ok.settings else { panic!() };
        assert_eq!(s.window, (6, 50));
    }

    #[test]
    fn zero_threads_rejected() {
        assert_eq!(resolve(&["--threads", "0", "singvals"]).unwrap_err().field, "threads");
    }

    #[test]
    fn rate_defaults_are_desk_scale() {
        let Settings::Rates(r) = resolve(&["rates"]).unwrap().settings else { panic!() };
        assert_eq!(r.n_grid, vec![2500, 5000, 10000, 20000]);
        assert_eq!(r.trials, 500);
        assert_eq!(r.noise_grid.len(), 4);
        assert_eq!(r.rule, RuleSettings::APriori { c: 1.0 });
    }
}
