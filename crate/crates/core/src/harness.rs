//! Command-line experiments.
//!
//! Each subcommand maps to one experiment: `theorem1` (identical distribution
//! of `X1` and the Bernoulli mixture), `theorem2` (independence of the linear
//! forms), `random-sum` (limit of Chebyshev-indexed random sums), `fixed-point`
//! (constructive solution of the functional equation), `dist` (sampler
//! fidelity) and `index` (the law of the random index).
//!
//! Trials run on a rayon pool. Trial `i` draws from stream `i + 1` of the
//! master seed and results are collected in trial order, so a report depends
//! only on the configuration and seed, never on the thread count.

use std::f64::consts::FRAC_PI_2;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use rand_distr::Distribution;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cf_lab::{
    factorization_residual, iterate_a, residual_polya, zero_free_check, DoublingSolution,
    DyadicGridFn, SOLVER_GRID_DEPTH,
};
use crate::cheb_index::{index_mean, index_pmf, pgf_eval};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::sech::{DistKind, Law, SechDistribution};
use crate::simulate::{sample_forms, sample_mixture, BaseLaw, Normalization, RandomSum};
use crate::stats_tests::{
    dcov_test, ecf, empirical_factorization_residual, ks_one_sample, ks_two_sample, TestConfig,
    TestReport, DEFAULT_PERMUTATIONS, MIN_DCOV_PAIRS, MIN_PERMUTATIONS,
};

pub const TOOL_NAME: &str = "sechlab";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Negative controls in `theorem1` must reach p below this.
pub const CONTROL_P_THRESHOLD: f64 = 1e-3;
/// Share of sech trials in `theorem1` and `dist` that must not reject.
pub const NULL_PASS_FRACTION: f64 = 0.85;
/// Share of controls in `theorem1` that must reach [`CONTROL_P_THRESHOLD`].
pub const CONTROL_REJECT_FRACTION: f64 = 0.95;
/// Sample size at which the dCov test reaches the power target against the
/// normal control. Found with `examples/power_pilot.rs`.
pub const DCOV_POWER_N: usize = 8000;
/// Slack over alpha allowed for the sech rejection rate in `theorem2`.
pub const INDEPENDENCE_SLACK: f64 = 0.05;
/// Power demanded of the dCov test against controls in `theorem2`.
pub const POWER_TARGET: f64 = 0.8;
/// Share of `random-sum` trials (1/n normalization) that must not reject.
pub const RANDOM_SUM_PASS_FRACTION: f64 = 0.7;
/// Sup error allowed between the doubling solution and the sech law.
pub const FIXED_POINT_TOLERANCE: f64 = 1e-6;
/// Values this close to zero count as zeros in `fixed-point`.
pub const ZERO_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Theorem1,
    Theorem2,
    RandomSum,
    FixedPoint,
    Dist,
    Index,
}

impl Experiment {
    pub fn as_str(&self) -> &'static str {
        match self {
            Experiment::Theorem1 => "theorem1",
            Experiment::Theorem2 => "theorem2",
            Experiment::RandomSum => "random-sum",
            Experiment::FixedPoint => "fixed-point",
            Experiment::Dist => "dist",
            Experiment::Index => "index",
        }
    }

    fn default_alpha(&self) -> f64 {
        match self {
            Experiment::Theorem2 => 0.05,
            _ => 0.01,
        }
    }

    fn default_n(&self) -> usize {
        match self {
            Experiment::Theorem2 => 2000,
            _ => 100_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// A fully resolved experiment configuration.
///
/// `out` and `threads` only say where and how the experiment runs and are left
/// out of the serialized echo, so they cannot make two reports differ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub dist: DistKind,
    pub scale: f64,
    pub n_samples: usize,
    pub trials: usize,
    pub seed: u64,
    pub alpha: f64,
    pub t_max: f64,
    pub depth: u32,
    pub sigma: f64,
    pub n_param: u32,
    pub base: BaseLaw,
    pub normalization: Normalization,
    pub m: usize,
    pub permutations: usize,
    pub tail_eps: f64,
    pub format: OutputFormat,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    /// Defaults for `experiment` with the given seed.
    pub fn new(experiment: Experiment, seed: u64) -> Self {
        ExperimentConfig {
            experiment,
            dist: DistKind::Sech,
            scale: 1.0,
            n_samples: experiment.default_n(),
            trials: 20,
            seed,
            alpha: experiment.default_alpha(),
            t_max: 4.0,
            depth: 30,
            sigma: FRAC_PI_2,
            n_param: 64,
            base: BaseLaw::Coin,
            normalization: Normalization::InvN,
            m: 100_000,
            permutations: DEFAULT_PERMUTATIONS,
            tail_eps: 1e-12,
            format: OutputFormat::Json,
            out: None,
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n_samples < 1 {
            return bad("--n must be at least 1".into());
        }
        if self.trials < 1 {
            return bad("--trials must be at least 1".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("--alpha must lie in (0, 1), got {}", self.alpha));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return bad(format!("--scale must be positive, got {}", self.scale));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return bad(format!("--t-max must be positive, got {}", self.t_max));
        }
        if !(10..=1000).contains(&self.depth) {
            return bad(format!("--depth must lie in 10..=1000, got {}", self.depth));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad(format!("--sigma must be positive, got {}", self.sigma));
        }
        if self.n_param < 1 {
            return bad("--n-param must be at least 1".into());
        }
        if self.m < 1 {
            return bad("--m must be at least 1".into());
        }
        if self.permutations < MIN_PERMUTATIONS {
            return bad(format!(
                "--permutations must be at least {MIN_PERMUTATIONS}"
            ));
        }
        if !(self.tail_eps > 0.0 && self.tail_eps < 1.0) {
            return bad(format!(
                "--tail-eps must lie in (0, 1), got {}",
                self.tail_eps
            ));
        }
        if self.experiment == Experiment::Theorem2 && self.n_samples < MIN_DCOV_PAIRS {
            return bad(format!("theorem2 needs --n of at least {MIN_DCOV_PAIRS}"));
        }
        if self.threads == Some(0) {
            return bad("--threads must be at least 1".into());
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Command line
// ---------------------------------------------------------------------------

/// Optional settings, from flags or from a JSON config file.
#[derive(Clone, Debug, Default, PartialEq, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    /// Law under test
    #[arg(long, value_parser = parse_dist)]
    pub dist: Option<DistKind>,
    /// Scale of the law under test
    #[arg(long)]
    pub scale: Option<f64>,
    /// Sample size per trial
    #[arg(long = "n")]
    #[serde(alias = "n")]
    pub n_samples: Option<usize>,
    /// Number of Monte Carlo trials
    #[arg(long)]
    pub trials: Option<usize>,
    /// Master seed (required, on the command line or in the config file)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Test level
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Output file (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Worker threads (defaults to all cores)
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(skip)]
    pub t_max: Option<f64>,
    #[arg(skip)]
    pub depth: Option<u32>,
    #[arg(skip)]
    pub sigma: Option<f64>,
    #[arg(skip)]
    pub n_param: Option<u32>,
    #[arg(skip)]
    pub base: Option<BaseLaw>,
    #[arg(skip)]
    pub normalization: Option<Normalization>,
    #[arg(skip)]
    pub m: Option<usize>,
    #[arg(skip)]
    pub permutations: Option<usize>,
    #[arg(skip)]
    pub tail_eps: Option<f64>,
}

fn parse_dist(s: &str) -> std::result::Result<DistKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_base(s: &str) -> std::result::Result<BaseLaw, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_normalization(s: &str) -> std::result::Result<Normalization, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Args)]
struct Common {
    #[command(flatten)]
    flags: Overrides,
    /// JSON file with settings; flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Parser)]
#[command(name = TOOL_NAME, version, about = "Hyperbolic secant characterization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// X1 against (X1 + X2)/2 + eps X3, two-sample KS per trial
    Theorem1 {
        #[command(flatten)]
        common: Common,
    },
    /// Independence of the random-coefficient linear forms, dCov test per trial
    Theorem2 {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        permutations: Option<usize>,
    },
    /// Normalized sums with a Chebyshev-generated number of terms
    RandomSum {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n_param: Option<u32>,
        #[arg(long, value_parser = parse_base)]
        base: Option<BaseLaw>,
        #[arg(long, value_parser = parse_normalization)]
        normalization: Option<Normalization>,
        #[arg(long)]
        m: Option<usize>,
    },
    /// Doubling solution of the functional equation against the sech law
    FixedPoint {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long)]
        sigma: Option<f64>,
    },
    /// Sampler fidelity of the configured law
    Dist {
        #[command(flatten)]
        common: Common,
    },
    /// Probability table of the random index
    Index {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n_param: Option<u32>,
        #[arg(long)]
        tail_eps: Option<f64>,
    },
}

/// Why parsing stopped, with the message to print and the exit code to use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliExit {
    pub code: i32,
    pub message: String,
}

fn merge(flags: Overrides, file: Overrides) -> Overrides {
    macro_rules! pick {
        ($($f:ident),*) => { Overrides { $($f: flags.$f.or(file.$f),)* } };
    }
    pick!(
        dist,
        scale,
        n_samples,
        trials,
        seed,
        alpha,
        out,
        format,
        threads,
        t_max,
        depth,
        sigma,
        n_param,
        base,
        normalization,
        m,
        permutations,
        tail_eps
    )
}

fn read_config_file(path: &Path) -> Result<Overrides> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("bad config file {}: {e}", path.display())))
}

fn resolve(
    experiment: Experiment,
    common: Common,
    specific: Overrides,
) -> Result<ExperimentConfig> {
    let flags = merge(specific, common.flags);
    let file = match &common.config {
        Some(p) => read_config_file(p)?,
        None => Overrides::default(),
    };
    let o = merge(flags, file);
    let seed = o.seed.ok_or_else(|| {
        Error::Config("an explicit --seed is required so that runs can be replayed".into())
    })?;
    let d = ExperimentConfig::new(experiment, seed);
    let cfg = ExperimentConfig {
        experiment,
        dist: o.dist.unwrap_or(d.dist),
        scale: o.scale.unwrap_or(d.scale),
        n_samples: o.n_samples.unwrap_or(d.n_samples),
        trials: o.trials.unwrap_or(d.trials),
        seed,
        alpha: o.alpha.unwrap_or(d.alpha),
        t_max: o.t_max.unwrap_or(d.t_max),
        depth: o.depth.unwrap_or(d.depth),
        sigma: o.sigma.unwrap_or(d.sigma),
        n_param: o.n_param.unwrap_or(d.n_param),
        base: o.base.unwrap_or(d.base),
        normalization: o.normalization.unwrap_or(d.normalization),
        m: o.m.unwrap_or(d.m),
        permutations: o.permutations.unwrap_or(d.permutations),
        tail_eps: o.tail_eps.unwrap_or(d.tail_eps),
        format: o.format.unwrap_or(d.format),
        out: o.out,
        threads: o.threads,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Parses `argv` (program name first) into a validated configuration.
pub fn parse_cli<I, T>(argv: I) -> std::result::Result<ExperimentConfig, CliExit>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| CliExit {
        code: e.exit_code(),
        message: e.render().to_string(),
    })?;
    let (experiment, common, specific) = match cli.command {
        Command::Theorem1 { common } => (Experiment::Theorem1, common, Overrides::default()),
        Command::Theorem2 {
            common,
            permutations,
        } => (
            Experiment::Theorem2,
            common,
            Overrides {
                permutations,
                ..Overrides::default()
            },
        ),
        Command::RandomSum {
            common,
            n_param,
            base,
            normalization,
            m,
        } => (
            Experiment::RandomSum,
            common,
            Overrides {
                n_param,
                base,
                normalization,
                m,
                ..Overrides::default()
            },
        ),
        Command::FixedPoint {
            common,
            t_max,
            depth,
            sigma,
        } => (
            Experiment::FixedPoint,
            common,
            Overrides {
                t_max,
                depth,
                sigma,
                ..Overrides::default()
            },
        ),
        Command::Dist { common } => (Experiment::Dist, common, Overrides::default()),
        Command::Index {
            common,
            n_param,
            tail_eps,
        } => (
            Experiment::Index,
            common,
            Overrides {
                n_param,
                tail_eps,
                ..Overrides::default()
            },
        ),
    };
    resolve(experiment, common, specific).map_err(|e| CliExit {
        code: 2,
        message: format!("error: {e}\n\nFor more information, try '--help'.\n"),
    })
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub test_name: String,
    pub statistic: f64,
    pub p_value: Option<f64>,
    pub reject: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test: Option<TestReport>,
    #[serde(skip_serializing_if = "Vec::is_empty", serialize_with = "pairs_as_map")]
    pub diagnostics: Vec<(String, f64)>,
}

impl TrialRecord {
    fn from_test(trial: usize, test: TestReport) -> Self {
        TrialRecord {
            trial,
            test_name: test.test_name.clone(),
            statistic: test.statistic,
            p_value: Some(test.p_value),
            reject: test.reject,
            test: Some(test),
            diagnostics: Vec::new(),
        }
    }

    pub fn diagnostic(&self, name: &str) -> Option<f64> {
        self.diagnostics
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| *v)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Aggregate {
    pub predicate: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pass_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reject_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub median_p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub median_statistic: Option<f64>,
    #[serde(serialize_with = "pairs_as_map")]
    pub metrics: Vec<(String, f64)>,
}

impl Aggregate {
    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| *v)
    }
}

fn pairs_as_map<S, V>(pairs: &[(String, V)], s: S) -> std::result::Result<S::Ok, S::Error>
where
    S: serde::Serializer,
    V: Serialize,
{
    s.collect_map(pairs.iter().map(|(k, v)| (k, v)))
}

/// A table of numbers with named columns.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub tool: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub trials: Vec<TrialRecord>,
    pub aggregate: Aggregate,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<Table>,
    #[serde(skip_serializing_if = "Vec::is_empty", serialize_with = "pairs_as_map")]
    pub sequences: Vec<(String, Vec<f64>)>,
}

impl ExperimentReport {
    fn new(config: &ExperimentConfig, trials: Vec<TrialRecord>, aggregate: Aggregate) -> Self {
        ExperimentReport {
            tool: TOOL_NAME.to_string(),
            version: TOOL_VERSION.to_string(),
            config: config.clone(),
            trials,
            aggregate,
            table: None,
            sequences: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Trial rows (`trial,statistic,p_value,reject`) or, for `fixed-point`
    /// and `index`, the value table.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        match (&self.table, self.config.experiment) {
            (Some(table), Experiment::FixedPoint | Experiment::Index) => {
                out.push_str(&table.columns.join(","));
                out.push('\n');
                for row in &table.rows {
                    let cells: Vec<String> = row.iter().map(|&v| fmt_num(v)).collect();
                    out.push_str(&cells.join(","));
                    out.push('\n');
                }
            }
            _ => {
                out.push_str("trial,statistic,p_value,reject\n");
                for t in &self.trials {
                    let p = t.p_value.map(fmt_num).unwrap_or_default();
                    let _ = writeln!(
                        out,
                        "{},{},{},{}",
                        t.trial,
                        fmt_num(t.statistic),
                        p,
                        t.reject
                    );
                }
            }
        }
        out
    }

    pub fn render(&self) -> String {
        match self.config.format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }

    /// Writes the rendered report to `config.out`, or returns it for stdout.
    pub fn write(&self) -> Result<Option<String>> {
        let body = self.render();
        match &self.config.out {
            Some(path) => {
                std::fs::write(path, body)?;
                Ok(None)
            }
            None => Ok(Some(body)),
        }
    }
}

/// Shortest round-trip decimal, switching to exponent form outside `[1e-4, 1e15)`.
fn fmt_num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn median(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let mut v: Vec<f64> = values.into_iter().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let k = v.len();
    Some(if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    })
}

fn fraction(trials: &[TrialRecord], pred: impl Fn(&TrialRecord) -> bool) -> f64 {
    trials.iter().filter(|t| pred(t)).count() as f64 / trials.len() as f64
}

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

fn run_trials<T, F>(config: &ExperimentConfig, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &mut RngStream) -> Result<T> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| {
        (0..config.trials)
            .into_par_iter()
            .map(|i| {
                let mut rng = RngStream::for_trial(config.seed, i as u64);
                f(i, &mut rng)
            })
            .collect()
    })
}

fn echo(rng: &RngStream) -> TestConfig {
    TestConfig {
        seed: Some(rng.seed()),
        stream: Some(rng.stream()),
        permutations: None,
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    match config.experiment {
        Experiment::Theorem1 => run_theorem1(config),
        Experiment::Theorem2 => run_theorem2(config),
        Experiment::RandomSum => run_random_sum(config),
        Experiment::FixedPoint => run_fixed_point(config),
        Experiment::Dist => run_dist(config),
        Experiment::Index => run_index(config),
    }
}

pub fn run_theorem1(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let law = Law::new(config.dist, config.scale)?;
    let n = config.n_samples;
    let trials = run_trials(config, |i, rng| {
        let fresh: Vec<f64> = (0..n).map(|_| law.sample(rng)).collect();
        let mixed = sample_mixture(rng, &law, n)?;
        let test = ks_two_sample(&fresh, &mixed.values)?
            .with_alpha(config.alpha)
            .with_config(echo(rng));
        Ok(TrialRecord::from_test(i, test))
    })?;
    let pass_fraction = fraction(&trials, |t| !t.reject);
    let strong_reject = fraction(&trials, |t| {
        t.p_value.is_some_and(|p| p < CONTROL_P_THRESHOLD)
    });
    let (predicate, passed) = if law.is_sech() {
        (
            format!("pass_fraction >= {NULL_PASS_FRACTION}"),
            pass_fraction >= NULL_PASS_FRACTION,
        )
    } else {
        (
            format!("fraction(p < {CONTROL_P_THRESHOLD}) >= {CONTROL_REJECT_FRACTION}"),
            strong_reject >= CONTROL_REJECT_FRACTION,
        )
    };
    let aggregate = Aggregate {
        predicate,
        passed,
        pass_fraction: Some(pass_fraction),
        reject_fraction: Some(1.0 - pass_fraction),
        median_p: median(trials.iter().filter_map(|t| t.p_value)),
        median_statistic: median(trials.iter().map(|t| t.statistic)),
        metrics: vec![
            ("strong_reject_fraction".into(), strong_reject),
            ("residual_polya_at_2".into(), residual_polya(&law, 2.0)),
        ],
    };
    Ok(ExperimentReport::new(config, trials, aggregate))
}

/// Sup of `|factorization_residual(law, s, t)|` over a `points x points` grid on `[0, t_max]^2`.
pub fn factorization_residual_sup(law: &Law, t_max: f64, points: usize) -> f64 {
    let h = t_max / (points - 1) as f64;
    let mut sup: f64 = 0.0;
    for i in 0..points {
        for j in 0..points {
            let r = factorization_residual(law, i as f64 * h, j as f64 * h);
            sup = sup.max(r.abs());
        }
    }
    sup
}

pub fn run_theorem2(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let law = Law::new(config.dist, config.scale)?;
    let grid: Vec<f64> = (0..5).map(|i| 0.5 * (i + 1) as f64).collect();
    let trials = run_trials(config, |i, rng| {
        let pairs = sample_forms(rng, &law, config.n_samples)?;
        let test = dcov_test(&pairs, config.permutations, rng)?.with_alpha(config.alpha);
        let mut rec = TrialRecord::from_test(i, test);
        let mut sup: f64 = 0.0;
        for &s in &grid {
            for &t in &grid {
                sup = sup.max(empirical_factorization_residual(&pairs.l1, &pairs.l2, s, t).abs());
            }
        }
        rec.diagnostics
            .push(("empirical_cf_residual_sup".into(), sup));
        rec.diagnostics
            .push(("correlation".into(), pairs.correlation()));
        Ok(rec)
    })?;
    let reject_fraction = fraction(&trials, |t| t.reject);
    let (predicate, passed) = if law.is_sech() {
        let limit = config.alpha + INDEPENDENCE_SLACK;
        (
            format!("reject_fraction <= {limit}"),
            reject_fraction <= limit,
        )
    } else {
        (
            format!("reject_fraction >= {POWER_TARGET}"),
            reject_fraction >= POWER_TARGET,
        )
    };
    let residual_sup = factorization_residual_sup(&law, 4.0, 101);
    let aggregate = Aggregate {
        predicate,
        passed,
        pass_fraction: Some(1.0 - reject_fraction),
        reject_fraction: Some(reject_fraction),
        median_p: median(trials.iter().filter_map(|t| t.p_value)),
        median_statistic: median(trials.iter().map(|t| t.statistic)),
        metrics: vec![
            ("cf_residual_sup".into(), residual_sup),
            (
                "median_empirical_cf_residual_sup".into(),
                median(
                    trials
                        .iter()
                        .filter_map(|t| t.diagnostic("empirical_cf_residual_sup")),
                )
                .unwrap_or(f64::NAN),
            ),
        ],
    };
    let mut report = ExperimentReport::new(config, trials, aggregate);
    let mut rows = Vec::new();
    for i in 0..=8 {
        for j in 0..=8 {
            let (s, t) = (0.5 * i as f64, 0.5 * j as f64);
            rows.push(vec![s, t, factorization_residual(&law, s, t)]);
        }
    }
    report.table = Some(Table {
        columns: vec!["s".into(), "t".into(), "residual".into()],
        rows,
    });
    Ok(report)
}

pub fn run_random_sum(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let template = RandomSum::new(config.n_param, config.base, config.normalization)?;
    let limit = SechDistribution::new(template.limit_scale())?;
    let n = config.n_param;
    // variance the 1/n sums settle to: that of the limit law
    let target_variance = limit.variance();
    let trials = run_trials(config, |i, rng| {
        let mut sums = template.clone();
        let batch = sums.sample(rng, config.m)?;
        let variance = batch.variance();
        let mut rec = match config.normalization {
            Normalization::InvN => {
                let test = ks_one_sample(&batch.values, |x| limit.cdf(x))?
                    .with_alpha(config.alpha)
                    .with_config(echo(rng));
                let mut rec = TrialRecord::from_test(i, test);
                if let Some(span) = config.base.lattice_span() {
                    // spread each atom uniformly over its lattice cell
                    let half = 0.5 * span * sums.factor();
                    let smoothed: Vec<f64> = batch
                        .values
                        .iter()
                        .map(|x| x + half * (2.0 * rng.random::<f64>() - 1.0))
                        .collect();
                    let smooth = ks_one_sample(&smoothed, |x| limit.cdf(x))?;
                    rec.diagnostics
                        .push(("lattice_smoothed_statistic".into(), smooth.statistic));
                    rec.diagnostics
                        .push(("lattice_smoothed_p".into(), smooth.p_value));
                }
                rec
            }
            Normalization::InvSqrtN => {
                let ratio = variance / target_variance;
                TrialRecord {
                    trial: i,
                    test_name: "variance_ratio".into(),
                    statistic: ratio,
                    p_value: None,
                    reject: !(n as f64 / 2.0..=2.0 * n as f64).contains(&ratio),
                    test: None,
                    diagnostics: Vec::new(),
                }
            }
        };
        rec.diagnostics.push(("sample_variance".into(), variance));
        Ok(rec)
    })?;
    let median_statistic = median(trials.iter().map(|t| t.statistic));
    let mut metrics = vec![
        ("limit_scale".into(), limit.scale()),
        ("target_variance".into(), target_variance),
        ("index_mean".into(), index_mean(n)),
    ];
    let (predicate, passed, pass_fraction) = match config.normalization {
        Normalization::InvN => {
            let pass = fraction(&trials, |t| !t.reject);
            if let Some(p) = median(
                trials
                    .iter()
                    .filter_map(|t| t.diagnostic("lattice_smoothed_p")),
            ) {
                metrics.push(("median_lattice_smoothed_p".into(), p));
            }
            (
                format!("pass_fraction >= {RANDOM_SUM_PASS_FRACTION}"),
                pass >= RANDOM_SUM_PASS_FRACTION,
                Some(pass),
            )
        }
        Normalization::InvSqrtN => {
            let ratio = median_statistic.unwrap_or(f64::NAN);
            let (lo, hi) = (n as f64 / 2.0, 2.0 * n as f64);
            (
                format!("median variance ratio in [{lo}, {hi}]"),
                (lo..=hi).contains(&ratio),
                None,
            )
        }
    };
    let aggregate = Aggregate {
        predicate,
        passed,
        pass_fraction,
        reject_fraction: pass_fraction.map(|p| 1.0 - p),
        median_p: median(trials.iter().filter_map(|t| t.p_value)),
        median_statistic,
        metrics,
    };
    Ok(ExperimentReport::new(config, trials, aggregate))
}

pub fn run_fixed_point(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let solution = DoublingSolution::new(config.sigma, config.t_max, config.depth)?;
    let grid = solution.grid(config.depth.min(SOLVER_GRID_DEPTH))?;
    // sech(sigma t) = sech_cf(t, 2 sigma / pi)
    let target = SechDistribution::new(config.sigma / FRAC_PI_2)?;
    let mut rows = Vec::with_capacity(grid.len());
    let (mut sup_err, mut sup_res): (f64, f64) = (0.0, 0.0);
    for (t, f) in grid.points() {
        let residual = residual_polya(&solution, t);
        let abs_err = (f - target.cf(t)).abs();
        sup_err = sup_err.max(abs_err);
        sup_res = sup_res.max(residual.abs());
        rows.push(vec![t, f, residual, abs_err]);
    }
    let zero = zero_free_check(&grid, ZERO_EPS);

    // exploration: iterate A from the normal law with the same curvature
    let sigma = config.sigma;
    let start = DyadicGridFn::from_fn(config.t_max, 10, |t| (-0.5 * sigma * sigma * t * t).exp())?;
    let (_, distances) = iterate_a(&start, 50, |t| target.cf(t));

    let passed = sup_err <= FIXED_POINT_TOLERANCE && zero.zero_free;
    let aggregate = Aggregate {
        predicate: format!("sup |f - sech| <= {FIXED_POINT_TOLERANCE} and zero free"),
        passed,
        pass_fraction: None,
        reject_fraction: None,
        median_p: None,
        median_statistic: None,
        metrics: vec![
            ("sup_abs_err".into(), sup_err),
            ("sup_residual".into(), sup_res),
            ("target_scale".into(), target.scale()),
            ("zero_free".into(), if zero.zero_free { 1.0 } else { 0.0 }),
            (
                "first_violation".into(),
                zero.first_violation.unwrap_or(f64::NAN),
            ),
            ("seed_point".into(), solution.seed_point()),
        ],
    };
    let mut report = ExperimentReport::new(config, Vec::new(), aggregate);
    report.table = Some(Table {
        columns: vec!["t".into(), "f".into(), "residual".into(), "abs_err".into()],
        rows,
    });
    report.sequences.push((
        "operator_iteration_sup_distance_from_normal".into(),
        distances,
    ));
    Ok(report)
}

/// t values where the empirical characteristic function is checked.
pub const ECF_POINTS: [f64; 3] = [0.5, 1.0, 2.0];

pub fn run_dist(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let law = Law::new(config.dist, config.scale)?;
    let n = config.n_samples;
    let trials = run_trials(config, |i, rng| {
        let xs: Vec<f64> = (0..n).map(|_| law.sample(rng)).collect();
        let test = ks_one_sample(&xs, |x| law.cdf(x))?
            .with_alpha(config.alpha)
            .with_config(echo(rng));
        let mut rec = TrialRecord::from_test(i, test);
        let var = crate::sech::variance(&xs);
        rec.diagnostics.push((
            "variance_rel_err".into(),
            (var / law.variance() - 1.0).abs(),
        ));
        // deviation in units of the 3/sqrt(N) band
        let band = 3.0 / (n as f64).sqrt();
        let worst = ECF_POINTS
            .iter()
            .map(|&t| (ecf(&xs, t) - law.cf(t)).abs() / band)
            .fold(0.0, f64::max);
        rec.diagnostics.push(("ecf_band_ratio".into(), worst));
        Ok(rec)
    })?;
    let pass_fraction = fraction(&trials, |t| !t.reject);
    let aggregate = Aggregate {
        predicate: format!("pass_fraction >= {NULL_PASS_FRACTION}"),
        passed: pass_fraction >= NULL_PASS_FRACTION,
        pass_fraction: Some(pass_fraction),
        reject_fraction: Some(1.0 - pass_fraction),
        median_p: median(trials.iter().filter_map(|t| t.p_value)),
        median_statistic: median(trials.iter().map(|t| t.statistic)),
        metrics: vec![
            ("variance".into(), law.variance()),
            (
                "median_variance_rel_err".into(),
                median(
                    trials
                        .iter()
                        .filter_map(|t| t.diagnostic("variance_rel_err")),
                )
                .unwrap_or(f64::NAN),
            ),
            (
                "max_ecf_band_ratio".into(),
                trials
                    .iter()
                    .filter_map(|t| t.diagnostic("ecf_band_ratio"))
                    .fold(0.0, f64::max),
            ),
        ],
    };
    Ok(ExperimentReport::new(config, trials, aggregate))
}

pub fn run_index(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let n = config.n_param;
    let dist = index_pmf(n, config.tail_eps)?;
    let mut pgf_gap: f64 = 0.0;
    for i in 1..=9 {
        let z = 0.1 * i as f64;
        pgf_gap = pgf_gap.max((dist.pgf(z) - pgf_eval(n, z)?).abs());
    }
    let mass: f64 = dist.probs().iter().sum();
    let mass_gap = (mass + dist.tail_bound() - 1.0).abs();
    let pgf_limit = 1e-10 + config.tail_eps;
    let passed = pgf_gap <= pgf_limit && mass_gap <= 1e-12;
    let aggregate = Aggregate {
        predicate: format!("pgf gap <= {pgf_limit:e} and |mass + tail - 1| <= 1e-12"),
        passed,
        pass_fraction: None,
        reject_fraction: None,
        median_p: None,
        median_statistic: None,
        metrics: vec![
            ("support_points".into(), dist.len() as f64),
            ("tail_bound".into(), dist.tail_bound()),
            ("mass_gap".into(), mass_gap),
            ("pgf_gap".into(), pgf_gap),
            ("mean_from_pmf".into(), dist.mean()),
            ("mean_exact".into(), index_mean(n)),
            ("shadow_discrepancy".into(), dist.shadow_discrepancy()),
        ],
    };
    let mut report = ExperimentReport::new(config, Vec::new(), aggregate);
    let rows = dist
        .support()
        .iter()
        .zip(dist.probs())
        .zip(dist.cumulative())
        .map(|((&k, &p), &c)| vec![k as f64, p, c])
        .collect();
    report.table = Some(Table {
        columns: vec!["k".into(), "p_k".into(), "cumulative".into()],
        rows,
    });
    Ok(report)
}
