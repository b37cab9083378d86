//! Power studies: sweep a grid of `gamma` (or `rho`) values, estimate the
//! rejection rate of each test, and tabulate the results next to the
//! theoretical detection boundary.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::{
    exact_pvalue_extremes, limiting_pvalue, permutation_pvalue, table_seed, CalibrationMethod,
    CalibrationPlan, NullTable, NullTableCache, Statistic, TestKind,
};
use crate::error::{Error, Result};
use crate::model::{
    derive_params, sample_gmcm, sample_gmm, MarginalTransform, ModelParams, PairedSample, Regime,
    RegimeSpec,
};
use crate::parametric::LrtParams;
use crate::rng::{derive_seed, stream};

const DATA_STREAM: u64 = 1;
const PERMUTATION_STREAM: u64 = 2;

/// Smallest shared null table allowed after desk-scale reduction.
pub const DESK_MIN_TABLE_REPS: usize = 1000;
/// Smallest per-replicate permutation count after desk-scale reduction; 19
/// permutations is the fewest that can reach p = 0.05.
pub const DESK_MIN_PERMUTATIONS: usize = 19;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    #[default]
    Gmm,
    Gmcm,
}

impl ModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Gmm => "gmm",
            ModelKind::Gmcm => "gmcm",
        }
    }
}

/// What the sweep values mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    /// `rho` derived from the regime: `n^-gamma` or `1 - n^-gamma`.
    #[default]
    Gamma,
    /// `rho` given directly.
    Rho,
}

/// A test and how to calibrate it. Missing fields fall back to the
/// reference experiment's choices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestSpec {
    pub test: TestKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<CalibrationMethod>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reps: Option<usize>,
}

impl TestSpec {
    pub fn new(test: TestKind) -> Self {
        Self {
            test,
            calibration: None,
            reps: None,
        }
    }

    pub fn with(test: TestKind, calibration: CalibrationMethod, reps: usize) -> Self {
        Self {
            test,
            calibration: Some(calibration),
            reps: Some(reps),
        }
    }

    pub fn method(&self) -> CalibrationMethod {
        self.calibration.unwrap_or_else(|| self.test.default_method())
    }

    pub fn reps(&self) -> usize {
        self.reps.unwrap_or_else(|| self.test.reference_reps())
    }
}

fn default_level() -> f64 {
    0.05
}

fn default_replications() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub model: ModelKind,
    #[serde(default)]
    pub transform_x: MarginalTransform,
    #[serde(default)]
    pub transform_y: MarginalTransform,
    pub n: usize,
    pub beta: f64,
    pub regime: Regime,
    #[serde(default)]
    pub sweep_kind: SweepKind,
    pub sweep: Vec<f64>,
    pub tests: Vec<TestSpec>,
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default = "default_replications")]
    pub replications: usize,
    pub master_seed: u64,
    /// Draw every dataset from the null (`eps = 0`) while the tests keep the
    /// sweep's alternative parameters.
    #[serde(default)]
    pub null: bool,
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(s)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !(self.level > 0.0 && self.level < 1.0) {
            return fail(format!("level must lie in (0, 1), got {}", self.level));
        }
        if self.replications < 10 {
            return fail(format!("replications must be at least 10, got {}", self.replications));
        }
        if self.n < 3 {
            return fail(format!("n must be at least 3, got {}", self.n));
        }
        if self.sweep.is_empty() {
            return fail("sweep must not be empty".into());
        }
        if self.sweep.windows(2).any(|w| !(w[0] < w[1])) {
            return fail("sweep must be sorted in strictly increasing order".into());
        }
        if self.tests.is_empty() {
            return fail("at least one test is required".into());
        }
        if self.model == ModelKind::Gmm
            && (!self.transform_x.is_identity() || !self.transform_y.is_identity())
        {
            return fail("marginal transforms apply to the gmcm model only".into());
        }
        for spec in &self.tests {
            let method = spec.method();
            if !spec.test.supports(method) {
                return fail(format!("{} does not support {} calibration", spec.test, method.as_str()));
            }
            if method.is_resampling() && spec.reps() < 1 {
                return fail(format!("{} needs reps >= 1", spec.test));
            }
            if method == CalibrationMethod::MonteCarlo && spec.reps() < crate::calibration::MIN_NULL_TABLE_REPS {
                return fail(format!(
                    "{}: shared null tables need reps >= {}",
                    spec.test,
                    crate::calibration::MIN_NULL_TABLE_REPS
                ));
            }
            let transformed = !self.transform_x.is_identity() || !self.transform_y.is_identity();
            if transformed && !spec.test.is_rank() && method != CalibrationMethod::Permutation {
                return fail(format!(
                    "{} under transformed marginals is only valid with permutation calibration",
                    spec.test
                ));
            }
        }
        for i in 0..self.sweep.len() {
            let params = self.params_at(i)?;
            if self.tests.iter().any(|t| t.test == TestKind::Lrt) {
                LrtParams::from_model(&params)?;
            }
        }
        Ok(())
    }

    /// Mixture parameters at sweep point `i`.
    pub fn params_at(&self, i: usize) -> Result<ModelParams> {
        let value = self.sweep[i];
        match self.sweep_kind {
            SweepKind::Gamma => derive_params(&RegimeSpec::new(self.regime, self.beta, value, self.n as u64)?),
            SweepKind::Rho => {
                let eps = (self.n as f64).powf(-self.beta);
                ModelParams::new(eps, value)
            }
        }
    }

    /// Desk-scale version: `n` and resampling counts divided by ten, with
    /// floors that keep 0.05-level decisions reachable.
    pub fn desk_scaled(&self) -> Self {
        let mut out = self.clone();
        out.n = (self.n / 10).max(3);
        for spec in &mut out.tests {
            let method = spec.method();
            let reps = spec.reps() / 10;
            spec.calibration = Some(method);
            spec.reps = Some(match method {
                CalibrationMethod::Permutation => reps.max(DESK_MIN_PERMUTATIONS),
                CalibrationMethod::MonteCarlo => reps.max(DESK_MIN_TABLE_REPS),
                _ => reps,
            });
        }
        out
    }
}

/// One `(sweep value, power)` estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerPoint {
    pub gamma: Option<f64>,
    pub rho: f64,
    pub eps: f64,
    pub power: f64,
    /// Wald 95% half-width, `1.96 sqrt(power (1 - power) / replications)`.
    pub ci_half_width: f64,
    pub replications: usize,
}

impl PowerPoint {
    pub fn new(gamma: Option<f64>, params: &ModelParams, rejections: usize, replications: usize) -> Self {
        let power = rejections as f64 / replications as f64;
        Self {
            gamma,
            rho: params.rho(),
            eps: params.eps(),
            power,
            ci_half_width: wald_half_width(power, replications),
            replications,
        }
    }
}

pub fn wald_half_width(power: f64, replications: usize) -> f64 {
    1.96 * (power * (1.0 - power) / replications as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerCurve {
    pub test: TestKind,
    pub points: Vec<PowerPoint>,
    pub boundary: Option<f64>,
}

impl PowerCurve {
    /// Power at the point whose sweep value is `gamma`.
    pub fn power_at_gamma(&self, gamma: f64) -> Option<f64> {
        self.points
            .iter()
            .find(|p| p.gamma.map_or(false, |g| (g - gamma).abs() < 1e-12))
            .map(|p| p.power)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointFailure {
    pub sweep_value: f64,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentResult {
    pub curves: Vec<PowerCurve>,
    pub failures: Vec<PointFailure>,
    pub null_tables: Vec<NullTableInfo>,
    pub elapsed_ms: u128,
}

impl ExperimentResult {
    pub fn curve(&self, test: TestKind) -> Option<&PowerCurve> {
        self.curves.iter().find(|c| c.test == test)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullTableInfo {
    pub statistic: String,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
}

/// How one test is calibrated at one sweep point.
enum Calibrator {
    Exact,
    Limiting,
    Permutation { reps: usize, ordinal: u64 },
    Table(std::sync::Arc<NullTable>),
}

/// Estimated power for every test at every sweep point.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    run_experiment_with_cache(config, &NullTableCache::new())
}

/// As [`run_experiment`], reusing null tables from `cache`.
pub fn run_experiment_with_cache(config: &ExperimentConfig, cache: &NullTableCache) -> Result<ExperimentResult> {
    config.validate()?;
    let started = Instant::now();
    let mut curves: Vec<PowerCurve> = config
        .tests
        .iter()
        .map(|spec| PowerCurve {
            test: spec.test,
            points: Vec::new(),
            boundary: match config.sweep_kind {
                SweepKind::Gamma => theoretical_boundary(config.regime, config.beta, spec.test).gamma(),
                SweepKind::Rho => None,
            },
        })
        .collect();
    let mut failures = Vec::new();
    let mut null_tables = Vec::new();

    for (i, &value) in config.sweep.iter().enumerate() {
        let params = config.params_at(i)?;
        let gamma = (config.sweep_kind == SweepKind::Gamma).then_some(value);
        let label = match gamma {
            Some(g) => format!("gamma = {g}"),
            None => format!("rho = {value}"),
        };
        match run_point(config, cache, i, &params, &mut null_tables) {
            Ok(rejections) => {
                for (curve, count) in curves.iter_mut().zip(rejections) {
                    curve
                        .points
                        .push(PowerPoint::new(gamma, &params, count, config.replications));
                }
            }
            Err(Error::Replicate { test, replication, source, .. }) => failures.push(PointFailure {
                sweep_value: value,
                message: format!("{test} failed at {label}, replication {replication}: {source}"),
            }),
            Err(other) => failures.push(PointFailure {
                sweep_value: value,
                message: format!("{label}: {other}"),
            }),
        }
    }

    Ok(ExperimentResult {
        curves,
        failures,
        null_tables,
        elapsed_ms: started.elapsed().as_millis(),
    })
}

fn run_point(
    config: &ExperimentConfig,
    cache: &NullTableCache,
    point: usize,
    params: &ModelParams,
    tables: &mut Vec<NullTableInfo>,
) -> Result<Vec<usize>> {
    let lrt = LrtParams::from_model(params).ok();
    let mut statistics = Vec::with_capacity(config.tests.len());
    let mut calibrators = Vec::with_capacity(config.tests.len());
    for spec in &config.tests {
        let stat = Statistic::new(spec.test, lrt)?;
        let calibrator = match spec.method() {
            CalibrationMethod::Exact => Calibrator::Exact,
            CalibrationMethod::Limiting => Calibrator::Limiting,
            CalibrationMethod::Permutation => Calibrator::Permutation {
                reps: spec.reps(),
                ordinal: spec.test as u64,
            },
            CalibrationMethod::MonteCarlo => {
                let seed = table_seed(config.master_seed, &stat);
                let table = cache.get_or_build(&stat, config.n, spec.reps(), seed)?;
                let info = NullTableInfo {
                    statistic: stat.label(),
                    n: config.n,
                    reps: spec.reps(),
                    seed,
                };
                if !tables.contains(&info) {
                    tables.push(info);
                }
                Calibrator::Table(table)
            }
        };
        statistics.push(stat);
        calibrators.push(calibrator);
    }

    let data_params = if config.null { params.with_null_weight() } else { *params };
    let per_replicate: Vec<Vec<bool>> = (0..config.replications)
        .into_par_iter()
        .map(|r| -> Result<Vec<bool>> {
            let sample = draw(config, &data_params, point, r)?;
            statistics
                .iter()
                .zip(&calibrators)
                .map(|(stat, cal)| {
                    let p = calibrate(config, stat, cal, &sample, point, r).map_err(|e| Error::Replicate {
                        test: stat.kind().to_string(),
                        sweep: format!("sweep point {point}"),
                        replication: r,
                        source: Box::new(e),
                    })?;
                    Ok(p <= config.level)
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut counts = vec![0usize; config.tests.len()];
    for decisions in per_replicate {
        for (c, rejected) in counts.iter_mut().zip(decisions) {
            *c += rejected as usize;
        }
    }
    Ok(counts)
}

fn draw(config: &ExperimentConfig, params: &ModelParams, point: usize, r: usize) -> Result<PairedSample> {
    let mut rng = stream(config.master_seed, &[DATA_STREAM, point as u64, r as u64]);
    match config.model {
        ModelKind::Gmm => sample_gmm(params, config.n, &mut rng),
        ModelKind::Gmcm => sample_gmcm(params, config.n, &config.transform_x, &config.transform_y, &mut rng),
    }
}

fn calibrate(
    config: &ExperimentConfig,
    stat: &Statistic,
    calibrator: &Calibrator,
    sample: &PairedSample,
    point: usize,
    r: usize,
) -> Result<f64> {
    let view = sample.view();
    let outcome = match calibrator {
        Calibrator::Exact => exact_pvalue_extremes(stat.evaluate(view)?, view.len())?,
        Calibrator::Limiting => limiting_pvalue(view, stat)?,
        Calibrator::Permutation { reps, ordinal } => {
            let seed = derive_seed(config.master_seed, &[PERMUTATION_STREAM, *ordinal, point as u64, r as u64]);
            permutation_pvalue(view, stat, &CalibrationPlan::permutation(*reps, seed))?
        }
        Calibrator::Table(table) => table.outcome(stat.evaluate(view)?),
    };
    Ok(outcome.p_value.expect("calibrated outcomes carry a p-value"))
}

/// Theoretical detection boundary for a test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    /// Asymptotically powerful on one side of `gamma*`.
    Gamma(f64),
    /// Asymptotically powerless throughout the regime.
    Powerless(&'static str),
    /// No boundary is established.
    NoneProven(&'static str),
}

impl Boundary {
    pub fn gamma(&self) -> Option<f64> {
        match self {
            Boundary::Gamma(g) => Some(*g),
            _ => None,
        }
    }
}

impl std::fmt::Display for Boundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Boundary::Gamma(g) => write!(f, "{g}"),
            Boundary::Powerless(why) => write!(f, "asymptotically powerless ({why})"),
            Boundary::NoneProven(why) => write!(f, "none proven ({why})"),
        }
    }
}

fn tidy(v: f64) -> f64 {
    (v * 1e12).round() / 1e12
}

/// `gamma*` for a test: `1/2 - beta` in the dense regime, `4(beta - 1/2)` in
/// the sparse regime, and `2 beta` for the extremes test in the sparse
/// regime.
pub fn theoretical_boundary(regime: Regime, beta: f64, test: TestKind) -> Boundary {
    use TestKind::*;
    match (regime, test) {
        (Regime::Dense, Lrt | Hc | Cov | Pearson | Spearman) => Boundary::Gamma(tidy(0.5 - beta)),
        (Regime::Dense, Extremes) => Boundary::Powerless("rho bounded away from 1"),
        (Regime::Dense, HcRank) => Boundary::NoneProven("established for the moderately sparse regime only"),
        (Regime::Sparse, Lrt | Hc) => Boundary::Gamma(tidy(4.0 * (beta - 0.5))),
        (Regime::Sparse, Extremes) => Boundary::Gamma(tidy(2.0 * beta)),
        (Regime::Sparse, Cov | Pearson) => Boundary::Powerless("sparse regime"),
        (Regime::Sparse, HcRank) if beta < 0.75 => Boundary::Gamma(tidy(4.0 * (beta - 0.5))),
        (Regime::Sparse, HcRank) => Boundary::NoneProven("moderately sparse only, requires beta < 3/4"),
        (Regime::Sparse, Spearman) => Boundary::NoneProven("no result in the sparse regime"),
        (_, HcPlugin) => Boundary::NoneProven("no analysis of the plug-in variant"),
    }
}

pub const CSV_HEADER: &str = "test,model,regime,beta,gamma,rho,n,replications,power,ci_half_width,boundary";

fn fmt_num(v: f64) -> String {
    format!("{v:?}")
}

/// Results table and a short text report.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub csv: String,
    pub report: String,
    pub monotonicity_violations: Vec<String>,
}

/// Renders curves as CSV rows and a report flagging monotonicity violations
/// larger than two combined confidence half-widths.
pub fn summarize(config: &ExperimentConfig, curves: &[PowerCurve]) -> Result<Summary> {
    if curves.is_empty() || curves.iter().all(|c| c.points.is_empty()) {
        return Err(Error::Config("nothing to summarize: no power estimates".into()));
    }
    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    let mut report = String::new();
    let mut violations = Vec::new();
    let _ = writeln!(
        report,
        "model {} | regime {} | beta {} | n {} | level {} | Wald 95% intervals",
        config.model.as_str(),
        config.regime,
        config.beta,
        config.n,
        config.level
    );
    for curve in curves {
        let boundary = curve.boundary.map(fmt_num).unwrap_or_default();
        let _ = writeln!(
            report,
            "\n{} (boundary: {})",
            curve.test,
            theoretical_boundary(config.regime, config.beta, curve.test)
        );
        for p in &curve.points {
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{},{},{},{},{}",
                curve.test,
                config.model.as_str(),
                config.regime,
                fmt_num(config.beta),
                p.gamma.map(fmt_num).unwrap_or_default(),
                fmt_num(p.rho),
                config.n,
                p.replications,
                fmt_num(p.power),
                fmt_num(p.ci_half_width),
                boundary
            );
            let x = p.gamma.map_or(format!("rho {:.6}", p.rho), |g| format!("gamma {g:<6}"));
            let _ = writeln!(report, "  {x}  power {:.3} ± {:.3}", p.power, p.ci_half_width);
        }
        if !config.null {
            for v in monotonicity_violations(config, curve) {
                let _ = writeln!(report, "  WARNING: {v}");
                violations.push(v);
            }
        }
    }
    Ok(Summary {
        csv,
        report,
        monotonicity_violations: violations,
    })
}

/// Pairs of points where a stronger signal has lower power by more than twice
/// the combined half-width.
pub fn monotonicity_violations(config: &ExperimentConfig, curve: &PowerCurve) -> Vec<String> {
    // Signal strength increases along the sweep except for dense gamma sweeps.
    let increasing = !(config.sweep_kind == SweepKind::Gamma && config.regime == Regime::Dense);
    let mut out = Vec::new();
    let pts = &curve.points;
    for a in 0..pts.len() {
        for b in a + 1..pts.len() {
            let (weak, strong) = if increasing { (&pts[a], &pts[b]) } else { (&pts[b], &pts[a]) };
            let combined = (weak.ci_half_width.powi(2) + strong.ci_half_width.powi(2)).sqrt();
            if strong.power < weak.power - 2.0 * combined {
                out.push(format!(
                    "{}: power {:.3} at rho {:.6} is below {:.3} at weaker signal rho {:.6}",
                    curve.test, strong.power, strong.rho, weak.power, weak.rho
                ));
            }
        }
    }
    out
}

/// Reproducibility manifest written next to the CSV.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: &'a ExperimentConfig,
    pub master_seed: u64,
    pub interval: &'static str,
    pub null_tables: &'a [NullTableInfo],
    pub failures: &'a [PointFailure],
}

impl<'a> Manifest<'a> {
    pub fn new(config: &'a ExperimentConfig, result: &'a ExperimentResult) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            config,
            master_seed: config.master_seed,
            interval: "wald-95",
            null_tables: &result.null_tables,
            failures: &result.failures,
        }
    }
}
