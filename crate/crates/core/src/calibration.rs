//! Turning statistics into p-values.
//!
//! Four calibrations are available: permutation of the `y` side of the
//! pairing, Monte Carlo simulation of fresh null data, the exact null law of
//! the extremes statistic, and the normal limit of the covariance, Pearson
//! and Spearman statistics.
//!
//! Resampled p-values are `(1 + #{k : s_k >= s_0}) / (reps + 1)` where the
//! `s_k` are oriented so that large values favor the alternative.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::sync::{Arc, Mutex};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SampleView;
use crate::normal;
use crate::parametric::{self, LrtParams};
use crate::rank::{self, RankPair};
use crate::rng::{derive_seed, stream, StreamRng};

/// Test names as they appear on the command line and in JSON.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestKind {
    Lrt,
    Cov,
    Pearson,
    Extremes,
    Hc,
    HcPlugin,
    Spearman,
    HcRank,
}

impl TestKind {
    pub const ALL: [TestKind; 8] = [
        TestKind::Lrt,
        TestKind::Cov,
        TestKind::Pearson,
        TestKind::Extremes,
        TestKind::Hc,
        TestKind::HcPlugin,
        TestKind::Spearman,
        TestKind::HcRank,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            TestKind::Lrt => "lrt",
            TestKind::Cov => "cov",
            TestKind::Pearson => "pearson",
            TestKind::Extremes => "extremes",
            TestKind::Hc => "hc",
            TestKind::HcPlugin => "hc-plugin",
            TestKind::Spearman => "spearman",
            TestKind::HcRank => "hc-rank",
        }
    }

    pub fn is_rank(&self) -> bool {
        matches!(self, TestKind::Spearman | TestKind::HcRank)
    }

    /// Calibration used by the reference experiments.
    pub fn default_method(&self) -> CalibrationMethod {
        match self {
            TestKind::Lrt | TestKind::Hc | TestKind::HcPlugin => CalibrationMethod::Permutation,
            TestKind::HcRank => CalibrationMethod::MonteCarlo,
            TestKind::Extremes => CalibrationMethod::Exact,
            TestKind::Cov | TestKind::Pearson | TestKind::Spearman => CalibrationMethod::Limiting,
        }
    }

    /// Resampling count used by the reference experiments (LRT 10^3, HC 200,
    /// rank HC 10^5).
    pub fn reference_reps(&self) -> usize {
        match self {
            TestKind::Lrt => 1000,
            TestKind::Hc | TestKind::HcPlugin => 200,
            TestKind::HcRank => 100_000,
            _ => 1000,
        }
    }

    /// Desk-scale resampling count, a tenth of [`TestKind::reference_reps`].
    pub fn desk_reps(&self) -> usize {
        self.reference_reps() / 10
    }

    pub fn supports(&self, method: CalibrationMethod) -> bool {
        match method {
            CalibrationMethod::Permutation | CalibrationMethod::MonteCarlo => true,
            CalibrationMethod::Exact => *self == TestKind::Extremes,
            CalibrationMethod::Limiting => {
                matches!(self, TestKind::Cov | TestKind::Pearson | TestKind::Spearman)
            }
        }
    }
}

impl std::fmt::Display for TestKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for TestKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TestKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown test {s:?}")))
    }
}

/// A test statistic ready to evaluate, carrying the oracle parameters the
/// likelihood ratio needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Statistic {
    Lrt(LrtParams),
    Cov,
    Pearson,
    Extremes,
    Hc,
    HcPlugin,
    Spearman,
    HcRank,
}

impl Statistic {
    /// Builds the statistic for `kind`; the likelihood ratio requires `lrt`.
    pub fn new(kind: TestKind, lrt: Option<LrtParams>) -> Result<Self> {
        Ok(match kind {
            TestKind::Lrt => Statistic::Lrt(lrt.ok_or_else(|| {
                Error::Config("the likelihood ratio test needs eps and rho".into())
            })?),
            TestKind::Cov => Statistic::Cov,
            TestKind::Pearson => Statistic::Pearson,
            TestKind::Extremes => Statistic::Extremes,
            TestKind::Hc => Statistic::Hc,
            TestKind::HcPlugin => Statistic::HcPlugin,
            TestKind::Spearman => Statistic::Spearman,
            TestKind::HcRank => Statistic::HcRank,
        })
    }

    pub fn kind(&self) -> TestKind {
        match self {
            Statistic::Lrt(_) => TestKind::Lrt,
            Statistic::Cov => TestKind::Cov,
            Statistic::Pearson => TestKind::Pearson,
            Statistic::Extremes => TestKind::Extremes,
            Statistic::Hc => TestKind::Hc,
            Statistic::HcPlugin => TestKind::HcPlugin,
            Statistic::Spearman => TestKind::Spearman,
            Statistic::HcRank => TestKind::HcRank,
        }
    }

    /// The statistic's reported value.
    pub fn evaluate(&self, sample: SampleView<'_>) -> Result<f64> {
        match self {
            Statistic::Lrt(p) => Ok(parametric::lrt_statistic(sample, p)),
            Statistic::Cov => Ok(parametric::covariance_statistic(sample)),
            Statistic::Pearson => parametric::pearson_statistic(sample),
            Statistic::Extremes => Ok(parametric::extremes_statistic(sample)),
            Statistic::Hc => parametric::hc_statistic(sample),
            Statistic::HcPlugin => parametric::hc_plugin_statistic(sample),
            Statistic::Spearman | Statistic::HcRank => {
                Ok(self.evaluate_ranks(&rank::compute_ranks(sample)?))
            }
        }
    }

    /// Value of a rank statistic on precomputed ranks.
    pub fn evaluate_ranks(&self, ranks: &RankPair) -> f64 {
        match self {
            Statistic::Spearman => rank::spearman_cov_statistic(ranks),
            Statistic::HcRank => rank::rank_hc_statistic(ranks),
            _ => unreachable!("evaluate_ranks called on a parametric statistic"),
        }
    }

    /// Orientation used for resampled p-values: larger means more evidence.
    pub fn score(&self, value: f64) -> f64 {
        match self {
            Statistic::Extremes => -value,
            _ => value,
        }
    }

    /// Label used in null-table files; encodes the oracle parameters for the
    /// likelihood ratio.
    pub fn label(&self) -> String {
        match self {
            Statistic::Lrt(p) => format!("lrt:eps={:?}:gap={:?}", p.eps(), p.one_minus_rho()),
            other => other.kind().as_str().to_string(),
        }
    }

    pub fn from_label(label: &str) -> Result<Self> {
        if let Some(rest) = label.strip_prefix("lrt:") {
            let mut eps = None;
            let mut gap = None;
            for part in rest.split(':') {
                match part.split_once('=') {
                    Some(("eps", v)) => eps = v.parse::<f64>().ok(),
                    Some(("gap", v)) => gap = v.parse::<f64>().ok(),
                    _ => {}
                }
            }
            let (eps, gap) = eps
                .zip(gap)
                .ok_or_else(|| Error::Config(format!("malformed statistic label {label:?}")))?;
            let params = crate::model::ModelParams::from_gap(eps, gap)?;
            return Ok(Statistic::Lrt(LrtParams::from_model(&params)?));
        }
        let kind: TestKind = label.parse()?;
        Statistic::new(kind, None)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationMethod {
    Exact,
    Permutation,
    MonteCarlo,
    Limiting,
}

impl CalibrationMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            CalibrationMethod::Exact => "exact",
            CalibrationMethod::Permutation => "permutation",
            CalibrationMethod::MonteCarlo => "monte_carlo",
            CalibrationMethod::Limiting => "limiting",
        }
    }

    pub fn is_resampling(&self) -> bool {
        matches!(self, CalibrationMethod::Permutation | CalibrationMethod::MonteCarlo)
    }
}

impl std::str::FromStr for CalibrationMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(CalibrationMethod::Exact),
            "permutation" => Ok(CalibrationMethod::Permutation),
            "monte_carlo" | "monte-carlo" => Ok(CalibrationMethod::MonteCarlo),
            "limiting" => Ok(CalibrationMethod::Limiting),
            other => Err(Error::Config(format!(
                "unknown calibration {other:?}, expected exact, permutation, monte_carlo or limiting"
            ))),
        }
    }
}

fn default_smoothing() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPlan {
    pub method: CalibrationMethod,
    /// Resampling count; ignored by exact and limiting calibrations.
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_smoothing")]
    pub add_one_smoothing: bool,
}

fn default_reps() -> usize {
    1
}

impl CalibrationPlan {
    pub fn new(method: CalibrationMethod, reps: usize, seed: u64) -> Self {
        Self {
            method,
            reps,
            seed,
            add_one_smoothing: true,
        }
    }

    pub fn permutation(reps: usize, seed: u64) -> Self {
        Self::new(CalibrationMethod::Permutation, reps, seed)
    }

    pub fn monte_carlo(reps: usize, seed: u64) -> Self {
        Self::new(CalibrationMethod::MonteCarlo, reps, seed)
    }

    pub fn exact() -> Self {
        Self::new(CalibrationMethod::Exact, 0, 0)
    }

    pub fn limiting() -> Self {
        Self::new(CalibrationMethod::Limiting, 0, 0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.method.is_resampling() && self.reps < 1 {
            return Err(Error::Config(format!(
                "{} calibration needs reps >= 1",
                self.method.as_str()
            )));
        }
        Ok(())
    }

    fn smoothed(&self, exceed: usize) -> f64 {
        if self.add_one_smoothing {
            (1 + exceed) as f64 / (self.reps + 1) as f64
        } else {
            exceed as f64 / self.reps as f64
        }
    }
}

/// Result of one calibrated test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub test: TestKind,
    pub statistic: f64,
    pub p_value: Option<f64>,
    pub calibration: CalibrationMethod,
    pub n: usize,
    pub seed: u64,
    pub calibration_reps: Option<usize>,
}

impl TestOutcome {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Runs `statistic` on `sample` with the calibration `plan` asks for.
pub fn run_test(sample: SampleView<'_>, statistic: &Statistic, plan: &CalibrationPlan) -> Result<TestOutcome> {
    plan.validate()?;
    let kind = statistic.kind();
    if !kind.supports(plan.method) {
        return Err(Error::Config(format!(
            "{kind} does not support {} calibration",
            plan.method.as_str()
        )));
    }
    let mut outcome = match plan.method {
        CalibrationMethod::Permutation => permutation_pvalue(sample, statistic, plan),
        CalibrationMethod::MonteCarlo => {
            let s0 = statistic.evaluate(sample)?;
            monte_carlo_pvalue(s0, sample.len(), statistic, plan)
        }
        CalibrationMethod::Exact => {
            let m = statistic.evaluate(sample)?;
            exact_pvalue_extremes(m, sample.len())
        }
        CalibrationMethod::Limiting => limiting_pvalue(sample, statistic),
    }?;
    outcome.seed = plan.seed;
    Ok(outcome)
}

/// Evaluates the statistic without calibrating it.
pub fn statistic_only(sample: SampleView<'_>, statistic: &Statistic) -> Result<TestOutcome> {
    Ok(TestOutcome {
        test: statistic.kind(),
        statistic: statistic.evaluate(sample)?,
        p_value: None,
        calibration: statistic.kind().default_method(),
        n: sample.len(),
        seed: 0,
        calibration_reps: None,
    })
}

/// Permutation p-value: replicate `k` shuffles the `y` side with the stream
/// derived from `(plan.seed, k)`.
pub fn permutation_pvalue(sample: SampleView<'_>, statistic: &Statistic, plan: &CalibrationPlan) -> Result<TestOutcome> {
    if plan.method != CalibrationMethod::Permutation {
        return Err(Error::Config("permutation_pvalue needs a permutation plan".into()));
    }
    plan.validate()?;
    let observed = statistic.evaluate(sample)?;
    let s0 = statistic.score(observed);
    let scores = permutation_scores(sample, statistic, plan.reps, plan.seed)?;
    let exceed = scores.iter().filter(|&&s| s >= s0).count();
    Ok(TestOutcome {
        test: statistic.kind(),
        statistic: observed,
        p_value: Some(plan.smoothed(exceed)),
        calibration: CalibrationMethod::Permutation,
        n: sample.len(),
        seed: plan.seed,
        calibration_reps: Some(plan.reps),
    })
}

/// Oriented scores of the statistic on `reps` random re-pairings.
pub fn permutation_scores(sample: SampleView<'_>, statistic: &Statistic, reps: usize, seed: u64) -> Result<Vec<f64>> {
    let x = sample.x();
    match statistic {
        Statistic::Spearman | Statistic::HcRank => {
            // Ranks of a permuted y are the permuted ranks of y.
            let base = rank::compute_ranks(sample)?;
            Ok((0..reps)
                .into_par_iter()
                .map_init(
                    || base.clone(),
                    |ranks, k| {
                        ranks.s_mut().copy_from_slice(base.s());
                        ranks.s_mut().shuffle(&mut stream(seed, &[k as u64]));
                        statistic.score(statistic.evaluate_ranks(ranks))
                    },
                )
                .collect())
        }
        _ => (0..reps)
            .into_par_iter()
            .map_init(
                || sample.y().to_vec(),
                |y, k| {
                    y.copy_from_slice(sample.y());
                    y.shuffle(&mut stream(seed, &[k as u64]));
                    statistic
                        .evaluate(SampleView::new_unchecked(x, y))
                        .map(|v| statistic.score(v))
                },
            )
            .collect(),
    }
}

/// Draws one null dataset of size `n` and evaluates `statistic` on it.
///
/// Parametric statistics see iid standard normal pairs; rank statistics see
/// the identity ranking against a uniform random permutation, which has the
/// same law as the ranks of any continuous independent pair.
pub fn null_draw(statistic: &Statistic, n: usize, rng: &mut StreamRng) -> Result<f64> {
    match statistic {
        Statistic::Spearman | Statistic::HcRank => {
            let r: Vec<u32> = (1..=n as u32).collect();
            let mut s = r.clone();
            s.shuffle(rng);
            Ok(statistic.evaluate_ranks(&RankPair::new_unchecked(r, s)))
        }
        Statistic::Hc => {
            let abs_u: Vec<f64> = (0..n)
                .map(|_| rng.sample::<f64, _>(StandardNormal).abs())
                .collect();
            Ok(parametric::hc_from_abs(abs_u))
        }
        _ => {
            let x: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            statistic.evaluate(SampleView::new_unchecked(&x, &y))
        }
    }
}

/// Oriented scores on `reps` fresh null datasets; replicate `k` uses the
/// stream `(seed, k)`.
pub fn monte_carlo_scores(statistic: &Statistic, n: usize, reps: usize, seed: u64) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidSample(format!("null simulation needs n >= 2, got {n}")));
    }
    (0..reps)
        .into_par_iter()
        .map(|k| null_draw(statistic, n, &mut stream(seed, &[k as u64])).map(|v| statistic.score(v)))
        .collect()
}

/// Monte Carlo p-value of an observed statistic value `s0`.
pub fn monte_carlo_pvalue(s0: f64, n: usize, statistic: &Statistic, plan: &CalibrationPlan) -> Result<TestOutcome> {
    if plan.method != CalibrationMethod::MonteCarlo {
        return Err(Error::Config("monte_carlo_pvalue needs a monte_carlo plan".into()));
    }
    plan.validate()?;
    let observed = statistic.score(s0);
    let scores = monte_carlo_scores(statistic, n, plan.reps, plan.seed)?;
    let exceed = scores.iter().filter(|&&s| s >= observed).count();
    Ok(TestOutcome {
        test: statistic.kind(),
        statistic: s0,
        p_value: Some(plan.smoothed(exceed)),
        calibration: CalibrationMethod::MonteCarlo,
        n,
        seed: plan.seed,
        calibration_reps: Some(plan.reps),
    })
}

/// Exact calibration of the extremes statistic.
pub fn exact_pvalue_extremes(m: f64, n: usize) -> Result<TestOutcome> {
    Ok(TestOutcome {
        test: TestKind::Extremes,
        statistic: m,
        p_value: Some(parametric::extremes_pvalue(m, n as u64)?),
        calibration: CalibrationMethod::Exact,
        n,
        seed: 0,
        calibration_reps: None,
    })
}

/// One-sided normal-limit p-values: `T_n / sqrt n` for the covariance,
/// `sqrt(n) r` for Pearson and the exactly standardized rank sum for
/// Spearman.
pub fn limiting_pvalue(sample: SampleView<'_>, statistic: &Statistic) -> Result<TestOutcome> {
    let n = sample.len();
    let (value, z) = match statistic {
        Statistic::Cov => {
            let t = parametric::covariance_statistic(sample);
            (t, t / (n as f64).sqrt())
        }
        Statistic::Pearson => {
            let r = parametric::pearson_statistic(sample)?;
            (r, (n as f64).sqrt() * r)
        }
        Statistic::Spearman => {
            let ranks = rank::compute_ranks(sample)?;
            (rank::spearman_cov_statistic(&ranks), rank::spearman_standardized(&ranks)?)
        }
        other => {
            return Err(Error::Config(format!(
                "{} has no limiting calibration",
                other.kind()
            )))
        }
    };
    Ok(TestOutcome {
        test: statistic.kind(),
        statistic: value,
        p_value: Some(normal::sf(z)),
        calibration: CalibrationMethod::Limiting,
        n,
        seed: 0,
        calibration_reps: None,
    })
}

/// Simulated null distribution of a statistic at sample size `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct NullTable {
    statistic: Statistic,
    n: usize,
    seed: u64,
    /// Raw statistic values in replicate order.
    values: Vec<f64>,
    /// Oriented scores, ascending.
    sorted_scores: Vec<f64>,
}

pub const MIN_NULL_TABLE_REPS: usize = 100;

/// Simulates `reps` null values of `statistic` at size `n`.
pub fn null_table(statistic: &Statistic, n: usize, reps: usize, seed: u64) -> Result<NullTable> {
    if reps < MIN_NULL_TABLE_REPS {
        return Err(Error::Config(format!(
            "null tables need reps >= {MIN_NULL_TABLE_REPS}, got {reps}"
        )));
    }
    let scores = monte_carlo_scores(statistic, n, reps, seed)?;
    let values = scores.iter().map(|&s| statistic.score(s)).collect();
    Ok(NullTable::from_values(*statistic, n, seed, values))
}

impl NullTable {
    pub fn from_values(statistic: Statistic, n: usize, seed: u64, values: Vec<f64>) -> Self {
        let mut sorted_scores: Vec<f64> = values.iter().map(|&v| statistic.score(v)).collect();
        sorted_scores.sort_unstable_by(f64::total_cmp);
        Self {
            statistic,
            n,
            seed,
            values,
            sorted_scores,
        }
    }

    pub fn statistic(&self) -> &Statistic {
        &self.statistic
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn reps(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(1 + #{table scores >= score(value)}) / (reps + 1)`.
    pub fn p_value(&self, value: f64) -> f64 {
        let s0 = self.statistic.score(value);
        let below = self.sorted_scores.partition_point(|&s| s < s0);
        let exceed = self.sorted_scores.len() - below;
        (1 + exceed) as f64 / (self.reps() + 1) as f64
    }

    pub fn outcome(&self, value: f64) -> TestOutcome {
        TestOutcome {
            test: self.statistic.kind(),
            statistic: value,
            p_value: Some(self.p_value(value)),
            calibration: CalibrationMethod::MonteCarlo,
            n: self.n,
            seed: self.seed,
            calibration_reps: Some(self.reps()),
        }
    }

    /// Rows `statistic,n,seed,rep,value`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["statistic", "n", "seed", "rep", "value"])?;
        let label = self.statistic.label();
        let n = self.n.to_string();
        let seed = self.seed.to_string();
        for (k, v) in self.values.iter().enumerate() {
            w.write_record([label.as_str(), &n, &seed, &k.to_string(), &format!("{v:?}")])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let headers = r.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["statistic", "n", "seed", "rep", "value"] {
            return Err(Error::Config(format!(
                "null table header must be statistic,n,seed,rep,value, got {:?}",
                headers.iter().collect::<Vec<_>>()
            )));
        }
        let mut key: Option<(String, usize, u64)> = None;
        let mut values = Vec::new();
        for (row, record) in r.records().enumerate() {
            let record = record?;
            let bad = |what: &str| Error::Config(format!("null table row {}: bad {what}", row + 2));
            let label = record[0].to_string();
            let n: usize = record[1].parse().map_err(|_| bad("n"))?;
            let seed: u64 = record[2].parse().map_err(|_| bad("seed"))?;
            let rep: usize = record[3].parse().map_err(|_| bad("rep"))?;
            let value: f64 = record[4].parse().map_err(|_| bad("value"))?;
            match &key {
                None => key = Some((label, n, seed)),
                Some(k) if k.0 == label && k.1 == n && k.2 == seed => {}
                Some(_) => return Err(bad("key (mixed tables in one file)")),
            }
            if rep != values.len() {
                return Err(bad("rep index"));
            }
            values.push(value);
        }
        let (label, n, seed) = key.ok_or_else(|| Error::Config("empty null table".into()))?;
        Ok(Self::from_values(Statistic::from_label(&label)?, n, seed, values))
    }
}

/// Process-wide cache of null tables keyed by statistic, `n`, reps and seed.
#[derive(Debug, Default, Clone)]
pub struct NullTableCache {
    tables: Arc<Mutex<HashMap<(String, usize, usize, u64), Arc<NullTable>>>>,
}

impl NullTableCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get_or_build(&self, statistic: &Statistic, n: usize, reps: usize, seed: u64) -> Result<Arc<NullTable>> {
        let key = (statistic.label(), n, reps, seed);
        if let Some(t) = self.tables.lock().expect("null table cache poisoned").get(&key) {
            return Ok(Arc::clone(t));
        }
        let table = Arc::new(null_table(statistic, n, reps, seed)?);
        self.tables
            .lock()
            .expect("null table cache poisoned")
            .insert(key, Arc::clone(&table));
        Ok(table)
    }

    pub fn len(&self) -> usize {
        self.tables.lock().expect("null table cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Seed for the null table of `statistic` under a master seed; shared by
/// every replicate and sweep point that uses the same statistic.
pub fn table_seed(master_seed: u64, statistic: &Statistic) -> u64 {
    let tag = statistic
        .label()
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3));
    derive_seed(master_seed, &[0x7461_626c_65, tag])
}
